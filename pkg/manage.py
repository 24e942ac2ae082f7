#!/usr/bin/env python
"""
Command-line entry point for the residue pruner

    python manage.py train_tokenizer | analyze_corpus | merge_stats |
                     identify_residue | sweep_thresholds | export_merge_tree |
                     prune_tokenizer | encode_text | estimate_savings

Exit codes: 0 success, 2 usage error, 3 data integrity error.
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is not importable. Install requirements.txt into the "
            "active environment before running the pipeline commands."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
