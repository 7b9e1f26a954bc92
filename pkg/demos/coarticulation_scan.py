"""
Scanning a corpus for coarticulation
====================================

Run the detector over the shipped synthetic corpus, print the per-class
table and inspect a few of the flagged tokens.
"""

from collections import Counter
from importlib import resources

from signphon.coarticulation import DetectorThresholds, scan
from signphon.corpus import parse_corpus
from signphon.inventory import load_default_inventory
from signphon.lexicon import load_default_lexicon

inv = load_default_inventory()
lex = load_default_lexicon(inv)
with resources.files("signphon.data").joinpath("coartic_fixture.jsonl").open() as fh:
    corpus = parse_corpus(fh, inv)

rep = scan(corpus, lex, inv)
print(rep.render())

# %%
# Each record says which endpoint moved and toward what.
for rec in rep.records[:5]:
    d = rec.deviations[0]
    print(f"{rec.token.gloss:12s} {d.endpoint:5s} {d.canonical:>10s} -> {d.observed:<10s} "
          f"(trigger {d.trigger}, {rec.severity})")

# %%
# Severity bands depend only on the thresholds; with the upper band
# switched off every non-subtle record becomes major.
two_band = scan(corpus, lex, inv, thresholds=DetectorThresholds(tau_major=None))
print(Counter(r.severity for r in rep.records))
print(Counter(r.severity for r in two_band.records))
