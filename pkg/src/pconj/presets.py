"""Named experiment presets for the command-line surface.

Each preset pins the scientific knobs of one canned experiment family:
model, signal strength, gamma (or a gamma range), the pattern set or
base/replacement-count sweep, the display method list, and the two
repetition scales (desk for quick runs, full for the archival scale).
Execution knobs (seed, workers, output format) stay on the command line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .models import pattern_catalog

__all__ = [
    "BASES",
    "DISPLAY_METHODS",
    "CURVE_METHODS",
    "Preset",
    "PRESETS",
    "preset_names",
]

# base label -> per-study signal levels before strength scaling
BASES: dict[str, tuple[float, ...]] = {
    "zeros": (0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    "spike": (2.0, 0.0, 0.0, 0.0, 0.0, 0.0),
}

DISPLAY_METHODS = ("stouffer", "fisher", "minimum", "e-product")
CURVE_METHODS = ("fisher", "stouffer", "minimum")

_ALL_PATTERNS = tuple(p.label for p in pattern_catalog(1.0))


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    description: str
    model: str
    # exactly one of r / sigma_multiple is set
    r: float | None = None
    sigma_multiple: float | None = None
    gamma: int | None = None
    gammas: tuple[int, ...] = ()
    patterns: tuple[str, ...] = ()
    base: str | None = None
    counts: tuple[int, ...] = ()
    methods: tuple[str, ...] = DISPLAY_METHODS
    desk_repetitions: int = 10_000
    full_repetitions: int = 100_000

    def strength(self, sigma: float) -> float:
        if self.sigma_multiple is not None:
            return self.sigma_multiple * sigma
        assert self.r is not None
        return self.r

    def strength_text(self) -> str:
        if self.sigma_multiple is not None:
            return f"{self.sigma_multiple:g}*sigma"
        return f"{self.r:g}"


def _p(**kw) -> Preset:
    return Preset(**kw)


PRESETS: dict[str, Preset] = {
    "fig1": _p(
        name="fig1",
        command="power",
        description="relative power, all patterns, beta model, r=1, gamma=2",
        model="beta",
        r=1.0,
        gamma=2,
        patterns=_ALL_PATTERNS,
    ),
    "fig2": _p(
        name="fig2",
        command="power",
        description="relative power, all patterns, beta model, r=5, gamma=2",
        model="beta",
        r=5.0,
        gamma=2,
        patterns=_ALL_PATTERNS,
    ),
    "fig3": _p(
        name="fig3",
        command="power",
        description="relative power, all patterns, normal model, r=0.5*sigma, gamma=2",
        model="normal",
        sigma_multiple=0.5,
        gamma=2,
        patterns=_ALL_PATTERNS,
    ),
    "fig4": _p(
        name="fig4",
        command="power",
        description="relative power, all patterns, normal model, r=1.5*sigma, gamma=2",
        model="normal",
        sigma_multiple=1.5,
        gamma=2,
        patterns=_ALL_PATTERNS,
    ),
    "fig5": _p(
        name="fig5",
        command="gamma-sweep",
        description="relative power vs gamma, patterns 7 and 7c, beta model, r=10",
        model="beta",
        r=10.0,
        gammas=(1, 2, 3, 4, 5),
        patterns=("7", "7c"),
    ),
    "fig6": _p(
        name="fig6",
        command="gamma-sweep",
        description="relative power vs gamma, patterns 7 and 7c, normal model, r=3*sigma",
        model="normal",
        sigma_multiple=3.0,
        gammas=(1, 2, 3, 4, 5),
        patterns=("7", "7c"),
    ),
    "fig7": _p(
        name="fig7",
        command="ecdf-curve",
        description="p-value ecdf curves, spike base at replacement counts 1 and 4, "
        "beta model, r=5, gamma=2",
        model="beta",
        r=5.0,
        gamma=2,
        base="spike",
        counts=(1, 4),
        methods=CURVE_METHODS,
        desk_repetitions=10_000,
        full_repetitions=10_000,
    ),
    "null-beta": _p(
        name="null-beta",
        command="null-ecdf",
        description="rejection rate at alpha vs replacement count, both bases, "
        "beta model, r=5, gamma=2",
        model="beta",
        r=5.0,
        gamma=2,
        base="both",
        counts=(0, 1, 2, 3, 4, 5),
    ),
    "null-normal": _p(
        name="null-normal",
        command="null-ecdf",
        description="rejection rate at alpha vs replacement count, both bases, "
        "normal model, r=1.5*sigma, gamma=2",
        model="normal",
        sigma_multiple=1.5,
        gamma=2,
        base="both",
        counts=(0, 1, 2, 3, 4, 5),
    ),
}


def preset_names(command: str) -> list[str]:
    return sorted(n for n, p in PRESETS.items() if p.command == command)
