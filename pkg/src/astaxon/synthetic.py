"""Synthetic labeled AS corpora for testing and demonstrations.

Each class draws its description from a small set of templates and its
scalar attributes from class-specific ranges that follow the usual
signatures: large ISPs have many customers and no providers, small ISPs
few providers and many peers, stubs (customers, universities) no customers,
and customers advertise well under nine /24s.

``clean=True`` (the default) gives a separable corpus: every description
carries its class's exclusive keyword.  With ``clean=False`` descriptions are
often generic or borrowed from another class, scalar ranges widen, and a
fraction of labels is flipped, which gives a learnable but noisy task.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from .core import CLASSES, K, AsClass, AsRecord, LabeledExample
from .textprep import StopWordList, default_stopwords, preprocess

DEFAULT_CLASS_COUNTS = (10, 30, 40, 15, 10, 15)

_TEMPLATES = {
    AsClass.LARGE_ISP: ("{name} Global Backbone", "{name} Tier1 Backbone Carrier", "{name} Intercontinental Backbone"),
    AsClass.SMALL_ISP: (
        "{name} Broadband Access Provider",
        "{name} Regional Broadband",
        "{city} Broadband Access",
    ),
    AsClass.CUSTOMER: ("{name} Bank Company", "{name} Hosting Company", "{name} Consulting Company"),
    AsClass.UNIVERSITY: ("University of {city}", "{city} State University", "{city} University College"),
    AsClass.IXP: ("{city} Internet Exchange", "{city} Peering Exchange Point", "{city} Exchange Point"),
    AsClass.NIC: ("{name} Network Information Registry", "{name} Domain Registry", "{name} Registry Services"),
}
_GENERIC = ("{name} Networks", "{name} Online Systems", "{city} Net Services", "{name} Group")

# (low, high) inclusive ranges: customers, providers, peers, prefixes, space
_SIGNATURES = {
    AsClass.LARGE_ISP: ((150, 2000), (0, 0), (5, 40), (300, 3000), (8000, 90000)),
    AsClass.SMALL_ISP: ((2, 60), (1, 5), (20, 120), (10, 250), (32, 3000)),
    AsClass.CUSTOMER: ((0, 0), (1, 3), (0, 2), (1, 4), (1, 8)),
    AsClass.UNIVERSITY: ((0, 1), (1, 3), (0, 5), (2, 25), (16, 600)),
    AsClass.IXP: ((0, 0), (0, 1), (0, 3), (1, 2), (1, 2)),
    AsClass.NIC: ((0, 0), (2, 6), (0, 4), (1, 3), (1, 4)),
}
_NOISY_SIGNATURES = {
    AsClass.LARGE_ISP: ((20, 2000), (0, 2), (2, 60), (50, 3000), (500, 90000)),
    AsClass.SMALL_ISP: ((0, 80), (1, 6), (0, 150), (1, 300), (4, 4000)),
    AsClass.CUSTOMER: ((0, 3), (1, 4), (0, 10), (1, 60), (1, 400)),
    AsClass.UNIVERSITY: ((0, 3), (1, 4), (0, 10), (1, 40), (8, 900)),
    AsClass.IXP: ((0, 2), (0, 3), (0, 10), (1, 5), (1, 8)),
    AsClass.NIC: ((0, 2), (1, 6), (0, 8), (1, 8), (1, 16)),
}

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "ta", "vo", "zen", "bri", "qua", "dor", "fel", "gan", "hux")
_CITIES = ("seoul", "auckland", "oslo", "lima", "quito", "perth", "derby", "turin", "kyoto", "porto", "tartu", "malmo")


def _pseudo_word(rng: np.random.Generator) -> str:
    n = int(rng.integers(2, 4))
    return "".join(_SYLLABLES[int(i)] for i in rng.integers(0, len(_SYLLABLES), n))


def _describe(cls: AsClass, rng: np.random.Generator, clean: bool) -> str:
    templates = _TEMPLATES[cls]
    if not clean:
        roll = rng.random()
        if roll < 0.35:
            templates = _GENERIC
        elif roll < 0.5:
            templates = _TEMPLATES[CLASSES[int(rng.integers(0, K))]]
    template = templates[int(rng.integers(0, len(templates)))]
    return template.format(name=_pseudo_word(rng).title(), city=_CITIES[int(rng.integers(0, len(_CITIES)))].title())


def generate_corpus(
    n: Optional[int] = None,
    seed: int = 0,
    clean: bool = True,
    class_counts: Optional[Sequence[int]] = None,
    label_noise: float = 0.1,
    stoplist: Optional[StopWordList] = None,
    first_asn: int = 1000,
) -> List[LabeledExample]:
    """Generate ``n`` labeled ASes (or exactly ``class_counts`` per class).

    With only ``n`` given, class sizes are drawn from the default mix.
    """
    rng = np.random.default_rng(seed)
    stoplist = stoplist or default_stopwords()
    if class_counts is None:
        if n is None:
            class_counts = DEFAULT_CLASS_COUNTS
        else:
            mix = np.array(DEFAULT_CLASS_COUNTS, dtype=float)
            class_counts = np.bincount(rng.choice(K, size=n, p=mix / mix.sum()), minlength=K)
    labels = [cls for cls, count in zip(CLASSES, class_counts) for _ in range(int(count))]
    labels = [labels[int(i)] for i in rng.permutation(len(labels))]

    signatures = _SIGNATURES if clean else _NOISY_SIGNATURES
    out = []
    for i, cls in enumerate(labels):
        terms = preprocess(_describe(cls, rng, clean), stoplist)
        scalars = [int(rng.integers(lo, hi + 1)) for lo, hi in signatures[cls]]
        label = cls
        if not clean and rng.random() < label_noise:
            label = CLASSES[int(rng.integers(0, K))]
        out.append(LabeledExample(AsRecord(first_asn + i, tuple(terms), *scalars), label))
    return out


def bundled_corpus() -> List[LabeledExample]:
    """The shipped 120-AS separable corpus (``data/synthetic_120.txt``)."""
    from importlib import resources

    from .ingest import labeled_examples, read_dataset

    text = resources.files("astaxon.data").joinpath("synthetic_120.txt").read_text("utf-8")
    return labeled_examples(read_dataset(text.splitlines()))
