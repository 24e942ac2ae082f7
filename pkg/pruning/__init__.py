"""
Lite tokenizers: residue removal, split/re-merge encoding, output masks and
savings estimates.
"""
