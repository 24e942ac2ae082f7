"""
Corpus statistics and residue identification
Counts final/intermediate token occurrences and neighbor distributions over a
corpus, then classifies tokens by frequency ratio and neighbor entropy.
"""
