#!/usr/bin/env python3
"""Regenerate data/lexicon.tsv from the wordfreq English frequency tables.

Rows are written raw (word<TAB>count); the C++ loader drops entries that are
not pure a-z. Counts are per-billion frequencies rounded to integers.
"""
import argparse

import wordfreq


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=10000)
    ap.add_argument("--out", default="data/lexicon.tsv")
    args = ap.parse_args()
    with open(args.out, "w", encoding="utf-8") as out:
        for word in wordfreq.top_n_list("en", args.size):
            count = max(1, round(wordfreq.word_frequency(word, "en") * 1e9))
            out.write(f"{word}\t{count}\n")


if __name__ == "__main__":
    main()
