"""
One hand or two?
================

Interpret the shipped utterances, then build a segment by hand and see how
the lexicon hint changes the verdict.
"""

from importlib import resources

from signphon.corpus import parse_corpus
from signphon.disambiguator import HandActivity, HandState, interpret, interpret_utterance
from signphon.inventory import load_default_inventory
from signphon.lexicon import load_default_lexicon

inv = load_default_inventory()
lex = load_default_lexicon(inv)
with resources.files("signphon.data").joinpath("disambiguation.jsonl").open() as fh:
    utterances = parse_corpus(fh, inv)

for utt in utterances:
    for r in interpret_utterance(utt, lex, inv):
        print(f"{utt.id:12s} {r.label:12s} {r.verdict:22s} {r.tag or '-':16s} "
              f"{','.join(r.fired_rules)}")

# %%
# Two moving hands with matching handshapes and mirrored orientation. With
# no hint it passes as a symmetric two-handed sign; a one-handed hint turns
# it into mirroring.
seg = HandActivity(HandState(True, "1", "1"), HandState(True, "1", "1"),
                   orientation_relation="mirror", movement_relation="simultaneous")
print(interpret(seg, inv=inv))
print(interpret(seg, lexicon_hint=lex["IX-loc"], inv=inv))
