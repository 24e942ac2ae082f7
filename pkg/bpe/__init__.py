"""
Byte pair encoding core: tokenizer models, loaders, the desk-scale trainer
and the merge graph built over a vocabulary.
"""
