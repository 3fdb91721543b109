"""Integer chromosome encoding of autoencoder architectures.

A candidate architecture is a fixed vector of 15 integer genes:

==== ============ =========== ==============================================
gene name         range       meaning
==== ============ =========== ==============================================
1    type         1..6        basic / denoising / contractive / robust /
                              sparse / variational
2    layers       0..3        number of hidden layer *pairs* around the
                              coding layer
3-6  units        1..f        layer widths; gene 3 is the outermost pair,
                              gene 6 the coding length
7-13 activation   1..8        linear, sigmoid, tanh, relu, selu, elu,
                              softplus, softsign; 7..6+L encoder, 10 coding,
                              11..10+L decoder
14   output act.  1..4        linear, relu, elu, softplus
15   loss         1..5        mse, mae, mape, bce, cosine proximity
==== ============ =========== ==============================================

All operators keep genes inside their bounds.  Structural validity (widths
must not grow toward the coding layer) is a separate predicate, because the
search deliberately produces and discards invalid individuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

GENOME_LENGTH = 15

# 0-based gene positions
TYPE_GENE = 0
LAYERS_GENE = 1
UNIT_GENES = slice(2, 6)
ACTIVATION_GENES = slice(6, 13)
CODING_ACT_GENE = 9
OUT_ACT_GENE = 13
LOSS_GENE = 14

AE_VARIANTS = ("basic", "denoising", "contractive", "robust", "sparse", "variational")

ACTIVATION_NAMES = {
    1: "linear",
    2: "sigmoid",
    3: "tanh",
    4: "relu",
    5: "selu",
    6: "elu",
    7: "softplus",
    8: "softsign",
}

LOSS_NAMES = {1: "mse", 2: "mae", 3: "mape", 4: "bce", 5: "cosine_proximity"}

# gene 14 codes map onto the main activation table
OUTPUT_ACT_TO_ACTIVATION = {1: 1, 2: 4, 3: 6, 4: 7}
ACTIVATION_TO_OUTPUT_ACT = {v: k for k, v in OUTPUT_ACT_TO_ACTIVATION.items()}

# crossover exchanges whole gene groups; cuts sit after genes 1, 2, 6, 13, 14
CROSSOVER_SEGMENTS = ((0, 1), (1, 2), (2, 6), (6, 13), (13, 14), (14, 15))


class DecodeError(ValueError):
    """Raised when a structurally invalid chromosome is decoded."""


@dataclass(frozen=True)
class GeneBounds:
    """Inclusive per-gene integer bounds."""

    low: tuple[int, ...]
    high: tuple[int, ...]

    @classmethod
    def for_features(cls, f: int) -> "GeneBounds":
        if f < 1:
            raise ValueError(f"feature count must be >= 1, got {f}")
        low = (1, 0) + (1,) * 4 + (1,) * 7 + (1, 1)
        high = (6, 3) + (f,) * 4 + (8,) * 7 + (4, 5)
        return cls(low, high)

    def contains(self, genes: Sequence[int]) -> bool:
        return len(genes) == GENOME_LENGTH and all(
            lo <= g <= hi for g, lo, hi in zip(genes, self.low, self.high)
        )


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[int, ...]

    def __post_init__(self):
        if len(self.genes) != GENOME_LENGTH:
            raise ValueError(f"expected {GENOME_LENGTH} genes, got {len(self.genes)}")

    @classmethod
    def from_text(cls, text: str) -> "Chromosome":
        """Parse the comma-separated form, e.g. ``"5,3,37,32,1,8,2,2,4,3,4,2,2,1,1"``."""
        try:
            genes = tuple(int(part) for part in text.split(","))
        except ValueError as exc:
            raise ValueError(f"malformed chromosome text {text!r}") from exc
        return cls(genes)

    def to_text(self) -> str:
        return ",".join(str(g) for g in self.genes)

    def __str__(self) -> str:
        return self.to_text()

    @property
    def ae_type(self) -> int:
        return self.genes[TYPE_GENE]

    @property
    def layers(self) -> int:
        return self.genes[LAYERS_GENE]

    @property
    def coding_units(self) -> int:
        return self.genes[5]


@dataclass(frozen=True)
class ArchitectureSpec:
    """A decoded, structurally valid autoencoder description.

    ``encoder_units`` runs outer to inner and the decoder mirrors it, so the
    full hidden chain is ``encoder_units + (coding_units,) + reversed``.
    Activation fields hold ids from :data:`ACTIVATION_NAMES`.
    """

    variant: str
    encoder_units: tuple[int, ...]
    coding_units: int
    encoder_activations: tuple[int, ...]
    coding_activation: int
    decoder_activations: tuple[int, ...]
    output_activation: int
    loss_id: int
    feature_count: int

    @property
    def layers(self) -> int:
        """Number of hidden layer pairs (gene 2)."""
        return len(self.encoder_units)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        """Unit counts from input to output, coding layer included."""
        f = self.feature_count
        return (f, *self.encoder_units, self.coding_units,
                *reversed(self.encoder_units), f)

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes)

    def describe_units(self) -> str:
        """Hidden-chain rendering used in reports, e.g. ``"37, 32, 8, 32, 37"``."""
        chain = (*self.encoder_units, self.coding_units, *reversed(self.encoder_units))
        return ", ".join(str(u) for u in chain)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "encoder_units": list(self.encoder_units),
            "coding_units": self.coding_units,
            "encoder_activations": list(self.encoder_activations),
            "coding_activation": self.coding_activation,
            "decoder_activations": list(self.decoder_activations),
            "output_activation": self.output_activation,
            "loss_id": self.loss_id,
            "feature_count": self.feature_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureSpec":
        return cls(
            variant=d["variant"],
            encoder_units=tuple(d["encoder_units"]),
            coding_units=int(d["coding_units"]),
            encoder_activations=tuple(d["encoder_activations"]),
            coding_activation=int(d["coding_activation"]),
            decoder_activations=tuple(d["decoder_activations"]),
            output_activation=int(d["output_activation"]),
            loss_id=int(d["loss_id"]),
            feature_count=int(d["feature_count"]),
        )


def random_chromosome(bounds: GeneBounds, rng: np.random.Generator) -> Chromosome:
    """Draw every gene uniformly within its bounds.

    The result is bound-valid but not necessarily structurally valid.
    """
    genes = tuple(
        int(rng.integers(lo, hi + 1)) for lo, hi in zip(bounds.low, bounds.high)
    )
    return Chromosome(genes)


def is_valid(c: Chromosome) -> bool:
    """True iff the *used* unit genes are non-increasing toward the coding layer.

    With L hidden pairs the used widths are genes 3..2+L followed by the
    coding length (gene 6); unused unit genes are ignored.
    """
    L = c.genes[LAYERS_GENE]
    chain = c.genes[2:2 + L] + (c.genes[5],)
    return all(chain[i] >= chain[i + 1] for i in range(len(chain) - 1))


def decode(c: Chromosome, f: int) -> ArchitectureSpec:
    """Expand a structurally valid chromosome into an :class:`ArchitectureSpec`."""
    if not is_valid(c):
        raise DecodeError(f"structurally invalid chromosome: {c}")
    L = c.genes[LAYERS_GENE]
    acts = c.genes[ACTIVATION_GENES]
    return ArchitectureSpec(
        variant=AE_VARIANTS[c.genes[TYPE_GENE] - 1],
        encoder_units=c.genes[2:2 + L],
        coding_units=c.genes[5],
        encoder_activations=acts[0:L],
        coding_activation=acts[3],
        decoder_activations=acts[4:4 + L],
        output_activation=OUTPUT_ACT_TO_ACTIVATION[c.genes[OUT_ACT_GENE]],
        loss_id=c.genes[LOSS_GENE],
        feature_count=f,
    )


def encode(spec: ArchitectureSpec, template: Chromosome | None = None) -> Chromosome:
    """Write a spec back into the used gene positions.

    Unused unit and activation genes are copied from ``template`` when given,
    otherwise set to their lower bounds.
    """
    bounds = GeneBounds.for_features(spec.feature_count)
    genes = list(template.genes if template is not None else bounds.low)
    L = spec.layers
    genes[TYPE_GENE] = AE_VARIANTS.index(spec.variant) + 1
    genes[LAYERS_GENE] = L
    for i, u in enumerate(spec.encoder_units):
        genes[2 + i] = u
    genes[5] = spec.coding_units
    for i, a in enumerate(spec.encoder_activations):
        genes[6 + i] = a
    genes[CODING_ACT_GENE] = spec.coding_activation
    for i, a in enumerate(spec.decoder_activations):
        genes[10 + i] = a
    genes[OUT_ACT_GENE] = ACTIVATION_TO_OUTPUT_ACT[spec.output_activation]
    genes[LOSS_GENE] = spec.loss_id
    return Chromosome(tuple(genes))


def mutate(c: Chromosome, bounds: GeneBounds, p: float,
           rng: np.random.Generator) -> Chromosome:
    """Resample each gene with probability ``p``, excluding its current value.

    Genes whose bounds span a single value cannot change.  The input is left
    untouched.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mutation probability must be in [0, 1], got {p}")
    genes = list(c.genes)
    for i, (lo, hi) in enumerate(zip(bounds.low, bounds.high)):
        if hi > lo and rng.random() < p:
            draw = int(rng.integers(lo, hi))  # hi - lo options
            genes[i] = draw + 1 if draw >= genes[i] else draw
    return Chromosome(tuple(genes))


def crossover(a: Chromosome, b: Chromosome,
              rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Exchange whole gene groups between two parents.

    Each of the five group boundaries is an active cut with probability 0.5;
    children alternate parent segments at every active cut.
    """
    child1, child2 = list(a.genes), list(b.genes)
    first, second = a.genes, b.genes
    for k, (start, stop) in enumerate(CROSSOVER_SEGMENTS):
        if k > 0 and rng.random() < 0.5:
            first, second = second, first
        child1[start:stop] = first[start:stop]
        child2[start:stop] = second[start:stop]
    return Chromosome(tuple(child1)), Chromosome(tuple(child2))


def to_unit_vector(c: Chromosome, bounds: GeneBounds) -> np.ndarray:
    """Map each gene to [0, 1] by per-gene min-max scaling (0 for pinned genes)."""
    lo = np.asarray(bounds.low, dtype=float)
    hi = np.asarray(bounds.high, dtype=float)
    span = hi - lo
    genes = np.asarray(c.genes, dtype=float)
    return np.where(span > 0, (genes - lo) / np.where(span > 0, span, 1.0), 0.0)


def from_unit_vector(v: np.ndarray, bounds: GeneBounds) -> Chromosome:
    """Clamp a real vector to [0, 1] and round back onto the integer grid."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    lo = np.asarray(bounds.low, dtype=float)
    hi = np.asarray(bounds.high, dtype=float)
    genes = np.rint(lo + v * (hi - lo)).astype(int)
    return Chromosome(tuple(int(g) for g in genes))


def architecture_free_combinations(types: int = 6, layer_options: int = 4,
                                   activation_options: int = 8,
                                   output_options: int = 4,
                                   loss_options: int = 5) -> int:
    """Size of the search space ignoring the dataset-dependent unit genes."""
    return types * layer_options * activation_options**7 * output_options * loss_options


def count_valid_unit_assignments(f: int, layers: int) -> int:
    """Number of structurally valid used-unit assignments for ``layers`` pairs.

    Counts non-increasing (layers+1)-tuples over 1..f, which is
    C(f + layers, layers + 1).
    """
    if f < 1:
        raise ValueError(f"feature count must be >= 1, got {f}")
    if not 0 <= layers <= 3:
        raise ValueError(f"layers must be in [0, 3], got {layers}")
    return math.comb(f + layers, layers + 1)


def enumerate_chromosomes(bounds: GeneBounds) -> Iterator[Chromosome]:
    """Odometer enumeration of every bound-valid chromosome.

    Gene 15 is the fastest-varying digit and gene 1 the slowest, so the
    first value has all genes at their lower bound.
    """
    ranges = [range(lo, hi + 1) for lo, hi in zip(bounds.low, bounds.high)]
    for genes in product(*ranges):
        yield Chromosome(genes)
