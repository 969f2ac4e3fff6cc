"""Dictionaries of complex atoms, ULA steering dictionaries and file I/O."""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Dictionary",
    "TOY_TARGET",
    "UlaSpec",
    "ZeroAtomError",
    "epsilon_bound",
    "from_json",
    "incoherence",
    "load_csv",
    "load_json",
    "normalize_atoms",
    "random_dictionary",
    "save_csv",
    "save_json",
    "to_json",
    "toy_dictionary",
    "ula_steering_dictionary",
    "uniform_angle_grid",
]

NORM_ATOL = 1e-12
# engines accept atoms this close to unit norm (the printed toy atom is off by ~4e-5)
ENGINE_NORM_ATOL = 1e-3

TOY_TARGET = np.array([1000.0, 10.0, 1.0], dtype=np.complex128)


class ZeroAtomError(ValueError):
    def __init__(self, index):
        super().__init__(f"atom {index} has zero norm and cannot be normalized")
        self.index = index


@dataclass(frozen=True, eq=False)
class Dictionary:
    """An M x N matrix of atoms (columns) with optional per-atom labels."""

    atoms: np.ndarray
    labels: np.ndarray | None = None
    normalized: bool = field(init=False)

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.complex128)
        if atoms.ndim != 2 or atoms.shape[0] < 1 or atoms.shape[1] < 1:
            raise ValueError(f"atoms must be a non-empty M x N matrix, got shape {atoms.shape}")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms contain non-finite entries")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=float)
            if labels.shape != (atoms.shape[1],):
                raise ValueError(f"expected {atoms.shape[1]} labels, got {labels.shape}")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
        norms = np.linalg.norm(atoms, axis=0)
        object.__setattr__(self, "normalized", bool(np.all(np.abs(norms - 1.0) <= NORM_ATOL)))

    @property
    def m(self):
        return self.atoms.shape[0]

    @property
    def n(self):
        return self.atoms.shape[1]

    def norms(self):
        return np.linalg.norm(self.atoms, axis=0)

    def require_unit_norm(self, atol=ENGINE_NORM_ATOL):
        bad = np.flatnonzero(np.abs(self.norms() - 1.0) > atol)
        if bad.size:
            raise ValueError(
                f"dictionary atoms must be unit norm; atom {int(bad[0])} has norm "
                f"{self.norms()[bad[0]]:.6g} (use normalize_atoms)"
            )

    def label_of(self, indices):
        if self.labels is None:
            return np.asarray(indices, dtype=float)
        return self.labels[np.asarray(indices, dtype=int)]


def normalize_atoms(dictionary):
    norms = dictionary.norms()
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroAtomError(int(zero[0]))
    return Dictionary(dictionary.atoms / norms, dictionary.labels)


def incoherence(dictionary):
    """Largest ``|<phi_i, phi_j>|`` over distinct atoms; 0 when N < 2."""
    if dictionary.n < 2:
        return 0.0
    g = np.abs(dictionary.atoms.conj().T @ dictionary.atoms)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def epsilon_bound(mu, k):
    """Additive submodularity slack ``4 K mu`` for an incoherent dictionary."""
    return 4.0 * k * mu


def toy_dictionary():
    """The 3 x 3 dictionary on which OMP picks the wrong second atom."""
    atoms = np.array(
        [
            [1.0, 0.9959, 0.0],
            [0.0, 0.09, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return Dictionary(atoms)


def random_dictionary(rng, m, n, real=False):
    """Unit-norm dictionary with i.i.d. Gaussian (complex unless ``real``) atoms."""
    a = rng.standard_normal((m, n))
    if not real:
        a = a + 1j * rng.standard_normal((m, n))
    return normalize_atoms(Dictionary(a))


def uniform_angle_grid(n, span=(-80.0, 80.0)):
    """``n`` equally spaced angles in degrees, both endpoints included."""
    if n < 1:
        raise ValueError("grid needs at least one angle")
    if n == 1:
        return np.array([0.5 * (span[0] + span[1])])
    return np.linspace(span[0], span[1], n)


@dataclass(frozen=True)
class UlaSpec:
    """Uniform linear array with half-wavelength spacing."""

    sensors: int
    angle_grid: tuple
    spacing: float = 0.5

    def __post_init__(self):
        grid = tuple(float(a) for a in self.angle_grid)
        object.__setattr__(self, "angle_grid", grid)
        if self.sensors < 1:
            raise ValueError("need at least one sensor")
        if not grid:
            raise ValueError("angle grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("angle grid must be strictly increasing")
        if self.spacing != 0.5:
            raise ValueError("only half-wavelength spacing (0.5) is supported")

    @classmethod
    def uniform(cls, sensors, n, span=(-80.0, 80.0)):
        return cls(sensors, tuple(uniform_angle_grid(n, span)))


def ula_steering_dictionary(spec):
    """Unit-norm steering vectors ``exp(-j 2 pi d k sin(theta)) / sqrt(M)``."""
    theta = np.deg2rad(np.asarray(spec.angle_grid))
    k = np.arange(spec.sensors)[:, None]
    atoms = np.exp(-2j * np.pi * spec.spacing * k * np.sin(theta)[None, :])
    return Dictionary(atoms / np.sqrt(spec.sensors), np.asarray(spec.angle_grid))


# -- file formats -----------------------------------------------------------


def _label_header(dictionary):
    if dictionary.labels is None:
        return [""] * dictionary.n
    return [repr(float(x)) for x in dictionary.labels]


def save_csv(dictionary, re_path, im_path):
    """Write real and imaginary parts as two row-major CSV files."""
    for path, part in ((re_path, dictionary.atoms.real), (im_path, dictionary.atoms.imag)):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_label_header(dictionary))
            for row in part:
                writer.writerow([repr(float(x)) for x in row])


def _read_part(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    data = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            data.append([float(x) for x in row])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    labels = None if all(h == "" for h in header) else [float(h) for h in header]
    return labels, np.array(data, dtype=float).reshape(len(data), len(header))


def load_csv(re_path, im_path):
    labels, re = _read_part(re_path)
    labels_im, im = _read_part(im_path)
    if re.shape != im.shape:
        raise ValueError(f"real part {re.shape} and imaginary part {im.shape} differ in shape")
    if labels != labels_im:
        raise ValueError("label headers of the real and imaginary files differ")
    return Dictionary(re + 1j * im, labels)


def to_json(dictionary):
    return {
        "m": dictionary.m,
        "n": dictionary.n,
        "labels": None if dictionary.labels is None else dictionary.labels.tolist(),
        "re": dictionary.atoms.real.tolist(),
        "im": dictionary.atoms.imag.tolist(),
    }


def from_json(doc):
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc["im"], dtype=float)
    if re.shape != (doc["m"], doc["n"]) or im.shape != re.shape:
        raise ValueError(f"re/im must both be {doc['m']} x {doc['n']}")
    return Dictionary(re + 1j * im, doc.get("labels"))


def save_json(dictionary, path):
    Path(path).write_text(json.dumps(to_json(dictionary)))


def load_json(path):
    return from_json(json.loads(Path(path).read_text()))
