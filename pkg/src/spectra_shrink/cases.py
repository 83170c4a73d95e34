"""Built-in simulation spectra: the bias rows, risk rows, and spiked cases.

Values are recorded exactly as tabulated; rows whose printed entries do
not add up to one are normalized implicitly wherever rates are formed,
since contribution rates only depend on the spectrum up to scale.
"""

from __future__ import annotations

from .core import Spectrum
from .sampling import SpikedModel

__all__ = [
    "TABLE1_SPECTRA",
    "TABLE2_SPECTRA",
    "SPIKED_CASES",
    "table1_spectrum",
    "table2_spectrum",
    "spiked_case",
    "named_spectrum",
    "spectrum_names",
]

#: Bias-study spectra (11 rows).
TABLE1_SPECTRA: tuple[tuple[float, ...], ...] = (
    (0.100,) * 10,
    (0.120,) * 5 + (0.080,) * 5,
    (0.140,) * 5 + (0.060,) * 5,
    (0.160,) * 5 + (0.040,) * 5,
    (0.180,) * 5 + (0.020,) * 5,
    (0.198,) * 5 + (0.002,) * 5,
    (0.200,) + (0.089,) * 9,
    (0.400,) + (0.067,) * 9,
    (0.600,) + (0.044,) * 9,
    (0.800,) + (0.022,) * 9,
    (0.990,) + (0.001,) * 9,
)

#: Quadratic-risk spectra (18 rows).
TABLE2_SPECTRA: tuple[tuple[float, ...], ...] = tuple(
    [
        tuple([0.10 + 0.01 * k] * 5 + [0.10 - 0.01 * k] * 5)
        for k in range(10)
    ]
    + [
        (0.20,) + (0.09,) * 9,
        (0.30,) + (0.08,) * 9,
        (0.40,) + (0.07,) * 9,
        (0.50,) + (0.06,) * 9,
        (0.60,) + (0.04,) * 9,
        (0.70,) + (0.03,) * 9,
        (0.80,) + (0.02,) * 9,
        (0.90,) + (0.01,) * 9,
    ]
)

#: Spiked covariance cases 1-10: (factor count, spikes), noise variance one,
#: dimension ten. Population eigenvalues are spike + 1 over ones.
_SPIKED_DEFS: tuple[tuple[int, tuple[float, ...]], ...] = (
    (5, (18.0,) * 5),
    (4, (22.5,) * 4),
    (3, (30.0,) * 3),
    (2, (45.0,) * 2),
    (1, (90.0,)),
    (5, (26.0, 22.0, 18.0, 14.0, 10.0)),
    (5, (31.0, 24.5, 18.0, 11.5, 5.0)),
    (4, (36.0, 27.0, 18.0, 9.0)),
    (3, (45.0, 30.0, 15.0)),
    (2, (80.0, 10.0)),
)

SPIKED_CASES: tuple[SpikedModel, ...] = tuple(
    SpikedModel(factor_count=m, spikes=spikes, noise_variance=1.0, dimension=10)
    for m, spikes in _SPIKED_DEFS
)


def table1_spectrum(row: int) -> Spectrum:
    """Bias-study spectrum by 1-based row number."""
    if not 1 <= row <= len(TABLE1_SPECTRA):
        raise ValueError(f"bias table rows run 1..{len(TABLE1_SPECTRA)}, got {row}")
    return Spectrum(TABLE1_SPECTRA[row - 1])


def table2_spectrum(row: int) -> Spectrum:
    """Risk-study spectrum by 1-based row number."""
    if not 1 <= row <= len(TABLE2_SPECTRA):
        raise ValueError(f"risk table rows run 1..{len(TABLE2_SPECTRA)}, got {row}")
    return Spectrum(TABLE2_SPECTRA[row - 1])


def spiked_case(case: int) -> SpikedModel:
    """Spiked covariance case by 1-based number."""
    if not 1 <= case <= len(SPIKED_CASES):
        raise ValueError(f"spiked cases run 1..{len(SPIKED_CASES)}, got {case}")
    return SPIKED_CASES[case - 1]


def spectrum_names() -> list[str]:
    return (
        ["uniform10"]
        + [f"table1:{k}" for k in range(1, len(TABLE1_SPECTRA) + 1)]
        + [f"table2:{k}" for k in range(1, len(TABLE2_SPECTRA) + 1)]
        + [f"case:{k}" for k in range(1, len(SPIKED_CASES) + 1)]
    )


def named_spectrum(name: str) -> Spectrum:
    """Resolve a named built-in spectrum.

    Accepts ``uniform10``, ``table1:<row>``, ``table2:<row>`` and
    ``case:<k>`` (the population spectrum of a spiked case).
    """
    if name == "uniform10":
        return Spectrum((0.1,) * 10)
    for prefix, resolver in (("table1:", table1_spectrum), ("table2:", table2_spectrum)):
        if name.startswith(prefix):
            try:
                row = int(name[len(prefix) :])
            except ValueError:
                raise ValueError(f"malformed spectrum name {name!r}") from None
            return resolver(row)
    if name.startswith("case:"):
        try:
            case = int(name[5:])
        except ValueError:
            raise ValueError(f"malformed spectrum name {name!r}") from None
        from .sampling import spiked_spectrum

        return spiked_spectrum(spiked_case(case))
    raise ValueError(f"unknown spectrum name {name!r}")
