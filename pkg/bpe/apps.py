from django.apps import AppConfig


class BpeConfig(AppConfig):
    name = 'bpe'
    verbose_name = 'BPE Tokenizers'
