"""Reference corpus BLEU-4 for the fixtures frozen in the C++ tests.

Written from the metric definition with exact rationals; shares no code with
the library. Tokenization is only exercised on ASCII fixtures here: lowercase,
split on whitespace, every punctuation character a token of its own.
"""
from collections import Counter
from fractions import Fraction
import math
import string


def tokens(text):
    out, cur = [], ""
    for ch in text.lower():
        if ch.isspace():
            if cur:
                out.append(cur)
            cur = ""
        elif ch in string.punctuation:
            if cur:
                out.append(cur)
            out.append(ch)
            cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def ngrams(toks, n):
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def bleu(cands, refs):
    match = [0] * 4
    total = [0] * 4
    c = r = 0
    for cand, ref in zip(cands, refs):
        ct, rt = tokens(cand), tokens(ref)
        c += len(ct)
        r += len(rt)
        for n in range(1, 5):
            cg, rg = ngrams(ct, n), ngrams(rt, n)
            match[n - 1] += sum(min(k, rg[g]) for g, k in cg.items())
            total[n - 1] += max(len(ct) - n + 1, 0)
    if c == 0:
        return 0.0
    prod = Fraction(1)
    for m, t in zip(match, total):
        prod *= Fraction(m, t) if m else Fraction(1, t + 1)
    bp = 1.0 if c > r else math.exp(1 - r / c)
    # prod is exact; one rounding for the 4th root.
    return bp * float(prod) ** 0.25


FIXTURES = [
    ("identical", ["the cat sat on the mat"], ["the cat sat on the mat"]),
    ("short_candidate", ["the cat sat"], ["the cat sat down"]),
    ("disjoint", ["a b c d"], ["e f g h"]),
    ("clipping", ["the the the the the the the"], ["the cat is on the mat"]),
    ("punctuation_case", ["Hello, World! It is fine."], ["hello world ! it is fine ."]),
    ("corpus_two_pairs", ["the quick brown fox jumps", "a lazy dog sleeps all day long"],
     ["the quick brown fox jumped over", "the lazy dog sleeps all day"]),
    ("longer_candidate", ["we should fund the new rail line now please"],
     ["we should fund the rail line"]),
]

if __name__ == "__main__":
    for name, c, r in FIXTURES:
        print(f"{name}\t{bleu(c, r)!r}")
