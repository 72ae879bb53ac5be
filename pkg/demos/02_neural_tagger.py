"""Train the sequence tagger on a toy corpus and watch it generalize.

The dictionary tagger can only fire on exact type-name strings. The
BiLSTM tagger, fed an embedding space where 'movies' sits next to
'films', tags queries the dictionary never saw. The second half shows
why mixed positive/negative training data matters for precision.

Run: python demos/02_neural_tagger.py   (about 20 seconds)
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from tableseek import Query
from tableseek.neural import (
    EmbeddingTable,
    TrainingConfig,
    forward,
    predict_tagged_query,
    train,
)
from tableseek.train_data import LabeledExample


def ex(tokens, tags):
    return LabeledExample(tuple(tokens.split()), tuple(tags.split()))


firsts = ["tom", "brad", "will", "julia", "meryl", "ryan", "emma", "james"]
lasts = ["cruise", "pitt", "smith", "roberts", "streep", "gosling", "stone"]
places = ["texas", "oregon", "maine", "ohio", "utah", "idaho"]

examples = []
for first in firsts:
    for last in lasts:
        if f"{first} {last}" != "tom cruise":  # hold the probe pair out
            examples.append(ex(f"{first} {last} films", "O O film"))
for place in places:
    examples.append(ex(f"cities in {place}", "city O O"))
    examples.append(ex(f"largest cities in {place}", "O city O O"))
# negative contexts: entity names and non-root PSTs, all tagged O
for negative in ["joan rivers net worth", "tyra banks show",
                 "prayer in schools", "smoking in parks"]:
    toks = negative.split()
    examples.append(LabeledExample(tuple(toks), ("O",) * len(toks)))

vocab = sorted({t for e in examples for t in e.tokens} | {"movies", "denzel"})
embeddings = EmbeddingTable.random(vocab, 12, seed=7)
# engineered semantic space: 'movies' is a near neighbor of 'films'
embeddings.vectors["movies"] = (
    embeddings.vectors["films"] + np.random.default_rng(1).normal(0, 0.01, 12)
)

config = TrainingConfig(
    epochs=30, batch_size=8, learning_rate=0.3, momentum=0.9, seed=0,
    char_dim=4, char_buckets=128, hidden_size=16,
)
result = train(examples, config, embeddings)
print("epoch losses:", " ".join(f"{loss:.3f}" for loss in result.epoch_losses))
print()

rho = 0.4
probes = [
    "tom cruise movies",      # unseen PST, semantically near 'films'
    "denzel washington films",  # unseen premodifier token
    "largest cities in texas",
    "joan rivers net worth",  # learned negative context
    "facebook login",         # out-of-vocabulary noise
]
for text in probes:
    query = Query.from_text(text)
    tagged = predict_tagged_query(result.model, query, rho)
    if tagged is None:
        print(f"{text!r:28} -> null")
    else:
        print(
            f"{text!r:28} -> <{tagged.pst}, {tagged.set_type}, "
            f"{tagged.confidence:.2f}>"
        )

print()
print("per-token tag probabilities for 'tom cruise movies':")
matrix = forward(result.model, Query.from_text("tom cruise movies"))
header = list(result.model.tags) + ["O"]
print(f"{'token':10} " + " ".join(f"{t:>8}" for t in header))
for token, row in zip(("tom", "cruise", "movies"), matrix.probs):
    print(f"{token:10} " + " ".join(f"{p:8.3f}" for p in row))
