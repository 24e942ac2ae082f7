from celery import group, shared_task
from django.conf import settings
import logging
from typing import List, Optional

from bpe.tokenizer import TokenizerModel

from .corpus import load_corpus, select_shard
from .corpus_stats import StatsShard, accumulate_shard, merge_shards, CorpusStats

logger = logging.getLogger(__name__)


@shared_task
def accumulate_stats_shard(
        native_model: dict,
        corpus: List[str],
        text_field: str,
        shard_index: int,
        shard_count: int,
        f2_mode: str,
        neighbor_scope: str,
        count_multiplicity: bool,
        sample_size: Optional[int] = None,
        seed: int = 0,
):
    """
    Count one shard of the corpus: documents shard_index, shard_index + n, ...

    The tokenizer travels as its native JSON document so workers need only
    the corpus files.
    """
    try:
        model = TokenizerModel.from_native(native_model, cache_size=settings.BPE_CACHE_SIZE)
        documents = load_corpus(corpus, text_field, sample_size, seed)
        shard = accumulate_shard(
            model,
            select_shard(documents, shard_index, shard_count),
            f2_mode=f2_mode,
            neighbor_scope=neighbor_scope,
            count_multiplicity=count_multiplicity,
        )
        logger.info(f"Shard {shard_index + 1}/{shard_count}: {shard.total_docs} documents")
        return shard.to_dict()

    except Exception as e:
        logger.error(f"Error in accumulate_stats_shard {shard_index}/{shard_count}: {e}")
        raise


def run_sharded(
        model: TokenizerModel,
        corpus: List[str],
        text_field: str,
        shard_count: int,
        f2_mode: str,
        neighbor_scope: str,
        count_multiplicity: bool,
        sample_size: Optional[int] = None,
        seed: int = 0,
) -> CorpusStats:
    """Fan the shards out as a Celery group and merge the results"""
    native = model.to_native()
    job = group(
        accumulate_stats_shard.s(
            native, corpus, text_field, index, shard_count,
            f2_mode, neighbor_scope, count_multiplicity, sample_size, seed,
        )
        for index in range(shard_count)
    )
    results = job.apply_async().get()
    shards = [StatsShard.from_dict(result) for result in results]
    return merge_shards(shards)
