"""Builders for synthetic fixtures used across test modules."""

from tableseek.core import Intent, Query, TaggedQuery
from tableseek.tables import DocumentContext, WebTable


def make_doc(**overrides) -> DocumentContext:
    values = dict(
        url="http://example.org/page",
        title="Example Page",
        h1="Example Page",
        sr_rank=1,
        static_rank=0.5,
        num_tables_on_page=1,
        page_text_length=1000,
    )
    values.update(overrides)
    return DocumentContext(**values)


def make_table(
    cells,
    column_names=(),
    subject_col=0,
    caption="",
    section_heading="",
    all_headings="",
    surrounding_text="",
    table_char_length=None,
    doc=None,
    **doc_overrides,
) -> WebTable:
    cells = tuple(tuple(str(c) for c in row) for row in cells)
    if table_char_length is None:
        table_char_length = max(1, sum(len(c) for row in cells for c in row))
    return WebTable(
        doc=doc or make_doc(**doc_overrides),
        caption=caption,
        section_heading=section_heading,
        all_headings=all_headings,
        surrounding_text=surrounding_text,
        column_names=tuple(column_names),
        subject_col=subject_col,
        cells=cells,
        table_char_length=table_char_length,
    )


def make_tagged(text, span, set_type, intent=Intent.LIST, confidence=0.9):
    return TaggedQuery(Query.from_text(text), intent, tuple(span), set_type, confidence)


def generalization_corpus():
    """Template corpus over five types; 'film' appears only as PST 'films'.

    Returns (train_examples, held_out) where the held-out queries use the
    never-trained token 'movies' over unseen premodifier combinations.
    """
    import numpy as np

    from tableseek.train_data import LabeledExample

    firsts = ["tom", "brad", "will", "emma", "ryan",
              "julia", "meryl", "denzel", "nicole", "james"]
    lasts = ["cruise", "pitt", "smith", "stone", "gosling",
             "roberts", "streep", "washington", "kidman", "dean"]
    places = ["texas", "california", "oregon", "florida", "maine", "ohio",
              "georgia", "utah", "nevada", "idaho", "colorado", "arizona",
              "montana", "kansas", "iowa", "virginia"]
    conditions = ["diabetes", "asthma", "anxiety", "migraine",
                  "arthritis", "insomnia", "allergies", "acne"]
    topics = ["history", "science", "cooking", "travel",
              "art", "music", "nature", "space"]

    def ex(tokens, tags):
        return LabeledExample(tuple(tokens), tuple(tags))

    combos = [(f, l) for f in firsts for l in lasts]
    rng = np.random.default_rng(0)
    rng.shuffle(combos)
    train_combos, held_combos = combos[20:], combos[:20]

    train_examples = [
        ex([f, l, "films"], ["O", "O", "film"]) for f, l in train_combos
    ]
    held_out = [
        ex([f, l, "movies"], ["O", "O", "film"]) for f, l in held_combos
    ]
    for p in places:
        train_examples.append(ex(["cities", "in", p], ["city", "O", "O"]))
        train_examples.append(
            ex(["largest", "cities", "in", p], ["O", "city", "O", "O"])
        )
        train_examples.append(
            ex(["best", "cities", "to", "live", "in", p],
               ["O", "city", "O", "O", "O", "O"])
        )
        train_examples.append(ex(["schools", "in", p], ["school", "O", "O"]))
        train_examples.append(
            ex(["best", "schools", "in", p], ["O", "school", "O", "O"])
        )
    for c in conditions:
        train_examples.append(ex(["drugs", "for", c], ["drug", "O", "O"]))
        train_examples.append(
            ex(["best", "drugs", "for", c], ["O", "drug", "O", "O"])
        )
    for t in topics:
        train_examples.append(ex(["books", "about", t], ["book", "O", "O"]))
        train_examples.append(
            ex(["best", "books", "about", t], ["O", "book", "O", "O"])
        )
    for f, l in train_combos[:40]:
        train_examples.append(ex(["books", "by", f, l], ["book", "O", "O", "O"]))

    base = list(train_examples)
    while len(train_examples) < 2000:
        train_examples.extend(
            base[: min(len(base), 2000 - len(train_examples))]
        )
    return train_examples, held_out
