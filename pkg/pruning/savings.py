"""
Parameter and compute savings from removing vocabulary rows

Accounting:
- embedding parameters E = V*H for tied embeddings, 2*V*H otherwise; the
  remaining P_body = total_params - E
- removing a fraction f of the vocabulary drops f*E parameters
- forward compute counts 2 FLOPs per multiply-accumulate over the
  transformer body and the output projection (V*H); the input embedding is a
  lookup and costs nothing
- "first" is a full forward over L tokens: 2*L*(P_body + V*H) plus, when the
  layer count is known, 4*n_layers*L^2*H for attention scores and values
- "cache" is one decode step against a KV cache of L tokens:
  2*(P_body + V*H) plus 4*n_layers*L*H
- the saving in both cases is the output projection share: 2*f*V*H per token
- n-gram tables over the vocabulary shrink by 1 - (1 - f)^n
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from rest_framework.exceptions import ValidationError

from .serializers import SavingsInputSerializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SavingsInput:
    vocab_size: int
    removed_fraction: float
    hidden_dim: int
    tied_embedding: bool
    total_params: int
    sequence_length: int
    num_layers: Optional[int] = None
    ngram_orders: Sequence[int] = (2, 3)

    @classmethod
    def validated(cls, data: dict) -> 'SavingsInput':
        """Build from untrusted values; raises ValueError with the serializer messages"""
        serializer = SavingsInputSerializer(data=data)
        try:
            serializer.is_valid(raise_exception=True)
        except ValidationError as e:
            raise ValueError(f"Invalid savings input: {e.detail}")
        values = dict(serializer.validated_data)
        values['ngram_orders'] = tuple(values['ngram_orders'])
        return cls(**values)


@dataclass
class SavingsReport:
    inputs: SavingsInput
    removed_tokens: int
    embedding_params: int
    body_params: int
    param_percent: float
    flops_first_percent: float
    flops_cache_percent: float
    ngram_reduction_percent: Dict[int, float] = field(default_factory=dict)
    attention_counted: bool = False

    def to_dict(self) -> dict:
        data = asdict(self)
        data['inputs']['ngram_orders'] = list(self.inputs.ngram_orders)
        data['ngram_reduction_percent'] = {str(n): v for n, v in self.ngram_reduction_percent.items()}
        return data

    def lines(self) -> List[str]:
        rows = [
            f"Removed tokens:        {self.removed_tokens} of {self.inputs.vocab_size}",
            f"Params saved:          {self.param_percent:.2f}%",
            f"FLOPs saved (first):   {self.flops_first_percent:.2f}%",
            f"FLOPs saved (cache):   {self.flops_cache_percent:.2f}%",
        ]
        for n, value in sorted(self.ngram_reduction_percent.items()):
            rows.append(f"{n}-gram table smaller:  {value:.2f}%")
        if not self.attention_counted:
            rows.append("Attention FLOPs not counted (no layer count given)")
        return rows


def estimate_savings(inputs: SavingsInput) -> SavingsReport:
    """
    Param and FLOP shares saved by removing `removed_fraction` of the vocabulary

    Args:
        inputs: model dimensions and removed fraction

    Returns:
        SavingsReport with percentages
    """
    if inputs.total_params <= 0:
        raise ValueError("total_params must be positive")
    if not 0.0 <= inputs.removed_fraction <= 1.0:
        raise ValueError(f"removed_fraction must lie in [0, 1], got {inputs.removed_fraction}")

    f = inputs.removed_fraction
    vh = inputs.vocab_size * inputs.hidden_dim
    embedding = vh * (1 if inputs.tied_embedding else 2)
    body = inputs.total_params - embedding
    if body < 0:
        raise ValueError("Embedding parameters exceed total_params")

    length = inputs.sequence_length
    attention_first = attention_step = 0
    if inputs.num_layers:
        attention_first = 4 * inputs.num_layers * length * length * inputs.hidden_dim
        attention_step = 4 * inputs.num_layers * length * inputs.hidden_dim

    flops_first = 2 * length * (body + vh) + attention_first
    flops_step = 2 * (body + vh) + attention_step

    report = SavingsReport(
        inputs=inputs,
        removed_tokens=round(f * inputs.vocab_size),
        embedding_params=embedding,
        body_params=body,
        param_percent=100.0 * f * embedding / inputs.total_params,
        flops_first_percent=100.0 * 2 * length * f * vh / flops_first,
        flops_cache_percent=100.0 * 2 * f * vh / flops_step,
        ngram_reduction_percent={n: 100.0 * (1 - (1 - f) ** n) for n in inputs.ngram_orders},
        attention_counted=bool(inputs.num_layers),
    )
    logger.info(f"Savings at f={f}: {report.param_percent:.2f}% params, {report.flops_cache_percent:.2f}% cached FLOPs")
    return report
