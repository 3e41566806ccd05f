"""Simulated laboratory data: analyzer settings, Born-rule outcomes, Poisson counts."""

import csv
from dataclasses import dataclass

import numpy as np

from .qmath import I2, bloch_operator, kron
from .metrics import DimensionError, density
from .particles import NullStateError

UNIT_TOL = 1e-12

#: Bloch vectors of the three Pauli analyzers; outcome 0 is the +1 eigenstate.
PAULI_AXES = {
    "X": (1.0, 0.0, 0.0),
    "Y": (0.0, 1.0, 0.0),
    "Z": (0.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class MeasurementSetting:
    """Polarization analyzer directions, one Bloch vector per measured qubit.

    For a two-qubit setting the first vector belongs to region L. Outcome
    indices run over ``(+, -)`` per side, so a joint setting has outcomes
    ``(++, +-, -+, --)``; for the Z analyzer ``+`` is H.
    """

    blochs: tuple
    label: str = ""

    def __post_init__(self):
        blochs = tuple(tuple(float(x) for x in n) for n in self.blochs)
        for n in blochs:
            if len(n) != 3 or abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
                raise ValueError(f"Bloch vector {n} is not a unit 3-vector")
        object.__setattr__(self, "blochs", blochs)
        if not self.label:
            object.__setattr__(self, "label", "".join(_axis_name(n) for n in blochs))

    @classmethod
    def pauli(cls, axes):
        """Setting from axis letters, e.g. ``"ZX"`` (L measures Z, R measures X)."""
        return cls(tuple(PAULI_AXES[a] for a in axes), label=axes)

    @property
    def n_qubits(self):
        return len(self.blochs)

    def projectors(self):
        """Outcome projectors in outcome order."""
        sides = [((I2 + bloch_operator(n)) / 2, (I2 - bloch_operator(n)) / 2) for n in self.blochs]
        ops = [np.eye(1, dtype=complex)]
        for pair in sides:
            ops = [kron(o, p) for o in ops for p in pair]
        return ops


def _axis_name(n):
    for k, v in PAULI_AXES.items():
        if np.allclose(n, v, atol=UNIT_TOL):
            return k
    return "n"


@dataclass(frozen=True)
class CountRecord:
    """Integer counts for the outcomes of one setting.

    ``outcomes`` lists which outcome indices of the setting were recorded;
    ``None`` means all of them in order. ``exact`` records carry real-valued
    expected counts instead of samples.
    """

    setting: MeasurementSetting
    counts: tuple
    total_expected: float = 0.0
    outcomes: tuple | None = None
    exact: bool = False

    def __post_init__(self):
        cast = float if self.exact else int
        counts = tuple(cast(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative counts: {counts}")
        object.__setattr__(self, "counts", counts)
        if self.outcomes is not None:
            object.__setattr__(self, "outcomes", tuple(int(k) for k in self.outcomes))
            if len(self.outcomes) != len(counts):
                raise ValueError("outcomes and counts have different lengths")
        elif len(counts) != 2 ** self.setting.n_qubits:
            raise ValueError(f"expected {2 ** self.setting.n_qubits} counts, got {len(counts)}")

    @property
    def outcome_indices(self):
        return self.outcomes if self.outcomes is not None else tuple(range(len(self.counts)))

    @property
    def complete(self):
        return len(set(self.outcome_indices)) == 2 ** self.setting.n_qubits

    def projectors(self):
        ops = self.setting.projectors()
        return [ops[k] for k in self.outcome_indices]

    def with_counts(self, counts):
        return CountRecord(self.setting, counts, self.total_expected, self.outcomes, self.exact)


def outcome_probs(rho, setting):
    """Born-rule probabilities of the setting's outcomes."""
    rho = density(rho)
    if rho.shape[0] != 2 ** setting.n_qubits:
        raise DimensionError(f"{rho.shape[0]}-dim state vs {setting.n_qubits}-qubit setting")
    p = np.array([np.real(np.trace(rho @ proj)) for proj in setting.projectors()])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_counts(probs, mean_total, rng, setting=None):
    """Independent Poisson counts with means ``mean_total * p_k``.

    ``rng`` is an integer seed or a ``numpy.random.Generator``; numpy's
    Poisson sampler switches from inversion to PTRS rejection at large means.
    """
    if mean_total <= 0:
        raise ValueError("mean_total must be positive")
    rng = np.random.default_rng(rng)
    lam = mean_total * np.asarray(probs, dtype=float)
    counts = rng.poisson(lam)
    if setting is None:
        setting = MeasurementSetting(((0.0, 0.0, 1.0),) * int(round(np.log2(len(lam)))))
    return CountRecord(setting, tuple(int(c) for c in counts), float(mean_total))


def exact_record(rho, setting, mean_total=1.0):
    """Record whose 'counts' are the exact expected values (infinite-count mode)."""
    p = outcome_probs(rho, setting)
    return CountRecord(setting, tuple(p * mean_total), float(mean_total), exact=True)


def simulate_records(rho, settings, mean_total, rng=None, exact=False):
    """One record per setting, Poisson-sampled unless ``exact``."""
    if exact:
        return [exact_record(rho, s, mean_total) for s in settings]
    rng = np.random.default_rng(rng)
    return [sample_counts(outcome_probs(rho, s), mean_total, rng, s) for s in settings]


def coherent_mix(outcome, visibility=1.0):
    """Conditional state with its which-path coherence scaled by ``visibility``.

    ``visibility = 1`` returns the pure sLOCC state; ``0`` returns the
    incoherent mixture of the two which-path histories, i.e. the state of
    particles that are distinguishable at the detectors.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    if outcome.is_null:
        raise NullStateError("null sLOCC outcome")
    pure = outcome.density()
    if visibility == 1.0:
        return pure
    if outcome.direct is not None:
        d, e = outcome.direct, outcome.exchange
        w = np.sum(np.abs(d) ** 2) + np.sum(np.abs(e) ** 2)
        mixed = (np.outer(d, d.conj()) + np.outer(e, e.conj())) / w
    else:
        mixed = np.diag(np.diag(pure))
    return visibility * pure + (1.0 - visibility) * mixed


def distinguishable_mix(outcome):
    """State seen when the photon paths stay separate at detection."""
    return coherent_mix(outcome, 0.0)


def coincidence_probability(overlap):
    """Two-photon coincidence probability behind a balanced splitter.

    ``overlap`` is the mode overlap of the two photons; perfect overlap
    gives zero coincidences (unit HOM visibility).
    """
    return 0.5 * (1.0 - abs(overlap) ** 2)


def write_records_csv(records, path):
    """Rows ``setting_label,outcome,counts,expected_total``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["setting_label", "outcome", "counts", "expected_total"])
        for rec in records:
            for k, c in zip(rec.outcome_indices, rec.counts):
                w.writerow([rec.setting.label, k, c, repr(float(rec.total_expected))])


def read_records_csv(path):
    """Inverse of :func:`write_records_csv` for Pauli-labelled settings."""
    grouped = {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    for row in csv.DictReader(rows):
        entry = grouped.setdefault(row["setting_label"], {"outcomes": [], "counts": [], "total": 0.0})
        entry["outcomes"].append(int(row["outcome"]))
        entry["counts"].append(float(row["counts"]))
        entry["total"] = float(row["expected_total"])
    records = []
    for label, e in grouped.items():
        setting = MeasurementSetting.pauli(label)
        outcomes = tuple(e["outcomes"])
        full = outcomes == tuple(range(2 ** setting.n_qubits))
        exact = any(not c.is_integer() for c in e["counts"])
        records.append(CountRecord(setting, tuple(e["counts"]), e["total"], None if full else outcomes, exact))
    return records


def chsh_settings(result):
    """The four joint settings ``(a,b), (a,b'), (a',b), (a',b')`` of a :class:`ChshResult`."""
    pairs = (("a", "b"), ("a", "b_p"), ("a_p", "b"), ("a_p", "b_p"))
    return [MeasurementSetting((getattr(result, x), getattr(result, y)), label=f"{x}{y}".replace("_p", "'"))
            for x, y in pairs]


def correlation_from_counts(record):
    n = np.asarray(record.counts, float)
    total = n.sum()
    if total <= 0:
        raise ValueError(f"no counts for setting {record.setting.label}")
    return float((n[0] - n[1] - n[2] + n[3]) / total)


def chsh_from_records(records):
    """``E(a,b) + E(a,b') + E(a',b) - E(a',b')`` from the four records of :func:`chsh_settings`."""
    e = [correlation_from_counts(r) for r in records]
    return e[0] + e[1] + e[2] - e[3]
