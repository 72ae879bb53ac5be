"""Walk through the dictionary-lookup taggers on classic queries.

Shows how plain type-dictionary lookup fires, where it goes wrong, and
how entity-name removal and the root-word check repair precision.

Run: python demos/01_intent_tagging.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tableseek import (
    Query,
    default_entity_name_lexicon,
    default_superlative_lexicon,
    default_type_dictionary,
    tdl_er_dp_tag,
    tdl_tag,
)

td = default_type_dictionary()
sl = default_superlative_lexicon()
el = default_entity_name_lexicon()

print(f"type dictionary: {len(td)} types, e.g. {', '.join(td.type_ids[:6])}, ...")
print()

queries = [
    "tom cruise films",            # clean list intent
    "largest city in california",  # superlative intent
    "golf courses in scotland",    # multi-word type name, plural
    "tom cruise movies",           # out-of-dictionary PST: lookup misses it
    "joan rivers net worth",       # the PST is part of an entity name
    "physical education in schools",  # the PST is not the root word
    "michael phelps",              # no intent at all
]

print("plain dictionary lookup:")
for text in queries:
    tagged = tdl_tag(Query.from_text(text), td, sl)
    if tagged is None:
        print(f"  {text!r:36} -> null")
    else:
        print(
            f"  {text!r:36} -> <{tagged.pst}, {tagged.set_type}, "
            f"{tagged.intent.value}, {tagged.confidence}>"
        )

print()
print("with entity-name removal and the root check:")
for text in queries:
    tagged, reason = tdl_er_dp_tag(Query.from_text(text), td, sl, el)
    if tagged is None:
        print(f"  {text!r:36} -> null ({reason.value})")
    else:
        premod = " ".join(tagged.premod) or "-"
        postmod = " ".join(tagged.postmod) or "-"
        print(
            f"  {text!r:36} -> pst={tagged.pst!r} type={tagged.set_type} "
            f"premod={premod!r} postmod={postmod!r}"
        )
