"""Nearest-neighbor bond graphs for ring, ladder, and torus geometries.

All builders assume periodic boundary conditions. Sites are 0-indexed;
bonds are unordered pairs stored as (i, j) with i < j, in a deterministic
construction order.
"""

from dataclasses import dataclass, field

from .exceptions import InvalidGeometryError

GEOMETRIES = ("ring", "ladder", "torus")


@dataclass(frozen=True)
class BondGraph:
    """Lattice geometry as a list of site pairs plus site count.

    ``bond_kinds`` is parallel to ``bonds`` and annotates each bond so
    callers can select e.g. a ladder rail pair versus a rung pair.
    """

    n_sites: int
    bonds: tuple
    geometry_tag: str
    dims: tuple
    bond_kinds: tuple = field(default=())

    def __post_init__(self):
        if self.n_sites < 1:
            raise InvalidGeometryError(f"n_sites must be positive, got {self.n_sites}")
        seen = set()
        for (i, j) in self.bonds:
            if not (0 <= i < j < self.n_sites):
                raise InvalidGeometryError(f"bad bond ({i}, {j}) for {self.n_sites} sites")
            if (i, j) in seen:
                raise InvalidGeometryError(f"duplicate bond ({i}, {j})")
            seen.add((i, j))
        if self.bond_kinds and len(self.bond_kinds) != len(self.bonds):
            raise InvalidGeometryError("bond_kinds length must match bonds")

    def degrees(self):
        """Per-site bond degree."""
        deg = [0] * self.n_sites
        for (i, j) in self.bonds:
            deg[i] += 1
            deg[j] += 1
        return deg

    def default_pair(self, pair: str = "auto"):
        """Nearest-neighbor pair used for reduced states.

        Ring and torus use the first in-row bond (0, 1). For the ladder,
        ``pair`` selects ``rail`` (default via ``auto``) or ``rung``.
        """
        if self.geometry_tag == "ladder":
            if pair in ("auto", "rail"):
                return (0, 1)
            if pair == "rung":
                return (0, self.dims[1])
            raise InvalidGeometryError(f"unknown pair selector '{pair}'")
        if pair not in ("auto", "rail", "rung"):
            raise InvalidGeometryError(f"unknown pair selector '{pair}'")
        return (0, 1)


def build_ring(L: int) -> BondGraph:
    """Periodic chain of ``L`` sites with bonds (i, i+1 mod L)."""
    if L < 3:
        raise InvalidGeometryError(f"ring needs L >= 3, got {L}")
    bonds = tuple(tuple(sorted((i, (i + 1) % L))) for i in range(L))
    return BondGraph(L, bonds, "ring", (L,), ("ring",) * L)


def build_ladder(L: int) -> BondGraph:
    """Two periodic rails of ``L`` sites coupled by ``L`` rungs.

    Sites are numbered rail-major: rail 0 is 0..L-1, rail 1 is L..2L-1.
    """
    if L < 3:
        raise InvalidGeometryError(f"ladder needs L >= 3 rungs, got {L}")
    bonds = []
    kinds = []
    for r in (0, 1):
        base = r * L
        for i in range(L):
            bonds.append(tuple(sorted((base + i, base + (i + 1) % L))))
            kinds.append("rail")
    for i in range(L):
        bonds.append((i, L + i))
        kinds.append("rung")
    return BondGraph(2 * L, tuple(bonds), "ladder", (2, L), tuple(kinds))


def build_torus(Lx: int, Ly: int) -> BondGraph:
    """Square lattice on a torus, row-major site order (site = y*Lx + x).

    Wrap bonds that coincide with interior bonds on a length-2 axis are
    collapsed to a single bond, which halves the effective coupling along
    that axis relative to a double-bond convention.
    """
    if Lx < 2 or Ly < 2:
        raise InvalidGeometryError(f"torus needs Lx, Ly >= 2, got {Lx}x{Ly}")
    bonds = []
    kinds = []
    seen = set()
    for y in range(Ly):
        for x in range(Lx):
            s = y * Lx + x
            for (t, kind) in ((y * Lx + (x + 1) % Lx, "row"),
                              (((y + 1) % Ly) * Lx + x, "col")):
                if t == s:
                    continue
                b = tuple(sorted((s, t)))
                if b in seen:
                    continue
                seen.add(b)
                bonds.append(b)
                kinds.append(kind)
    return BondGraph(Lx * Ly, tuple(bonds), "torus", (Lx, Ly), tuple(kinds))
