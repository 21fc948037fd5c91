"""Pydantic schemas for report serialization.

Every CLI payload is one of these models. Scalars travel as ``"p/q"``
strings and labels as words over ``a``/``b`` (the empty word is ``∅``,
factors of a product label are joined with ``⊠``).
"""

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field


class HomDimReport(BaseModel):
    """Hom dimension between two Schwartz spaces."""

    n: int = Field(..., description="Arm length of the source R^(n)")
    m: int = Field(..., description="Arm length of the target R^(m)")
    dimension: int = Field(..., description="Number of orbits of R^(m) x R^(n)")
    delannoy: int = Field(..., description="Delannoy number D(n, m) from the recurrence")


class DecompositionReport(BaseModel):
    """Multiplicities of simple objects in an object of the Karoubi envelope."""

    object: str = Field(..., description="Description of the decomposed object")
    s: int = Field(..., description="Number of group factors")
    multiplicities: Dict[str, int] = Field(..., description="Simple label to multiplicity")
    total: int = Field(..., description="Sum of multiplicities")


class RestrictionRuleReport(BaseModel):
    """Observed restriction of a simple object against the cut/deletion rule."""

    label: str = Field(..., description="Label of the restricted simple")
    expected: Dict[str, int] = Field(..., description="Multiplicities predicted by the rule")
    observed: Dict[str, int] = Field(..., description="Multiplicities found by decomposition")
    passed: bool = Field(..., description="Whether both tables agree")


class TensorReport(BaseModel):
    """Decomposition of a tensor product of two simples."""

    left: str = Field(..., description="Label of the left factor")
    right: str = Field(..., description="Label of the right factor")
    multiplicities: Dict[str, int] = Field(..., description="Simple label to multiplicity")


class RegistryEntry(BaseModel):
    """One simple object of the registry."""

    label: str = Field(..., description="Word over a/b")
    length: int = Field(..., description="Length of the word")
    dimension: str = Field(..., description="Categorical dimension (trace of the idempotent)")
    rank: int = Field(..., description="Number of non-zero idempotent coefficients")


class RegistryReport(BaseModel):
    """Summary of a built registry."""

    depth: int = Field(..., description="Largest label length")
    field: str = Field(..., description="Scalar field")
    version: int = Field(..., description="Canonical orbit order version")
    path: Optional[str] = Field(None, description="Cache file the registry was written to")
    entries: List[RegistryEntry] = Field(..., description="Registry entries by length then word")


class RegistryFileEntry(BaseModel):
    """Stored idempotent of one simple object."""

    arms: List[int] = Field(..., description="Arms of the ambient transitive G-set")
    coeffs: List[str] = Field(..., description="Idempotent coefficients in canonical order")


class RegistryFile(BaseModel):
    """On-disk registry cache."""

    version: int = Field(..., description="Canonical orbit order version")
    field: str = Field(..., description="Scalar field the idempotents live over")
    depth: int = Field(..., description="Largest label length")
    labels: Dict[str, RegistryFileEntry] = Field(..., description="Entries keyed by word")


class MorphismPayload(BaseModel):
    """A morphism as source, target and coefficient array."""

    source: str = Field(..., description="Source G-set")
    target: str = Field(..., description="Target G-set")
    coeffs: List[str] = Field(..., description="Coefficients in canonical orbit order")


class EIdempotentReport(BaseModel):
    """E-idempotents of a Schwartz algebra C(R^(n))."""

    n: int = Field(..., description="Arm length")
    count: int = Field(..., description="Number of E-idempotents")
    relations: List[List[int]] = Field(..., description="Orbit sets of each E-idempotent")
    bijection: bool = Field(..., description="Matches the G-stable equivalence relations")


class SubalgebraEntry(BaseModel):
    """An etale subalgebra C(R^(m)) of C(R^(n))."""

    m: int = Field(..., description="Arm length of the subalgebra")
    coordinates: List[int] = Field(..., description="Coordinates kept by the quotient map")
    relation: List[int] = Field(..., description="Orbit set of the E-idempotent")


class SubalgebraReport(BaseModel):
    """Lattice of etale subalgebras of C(R^(n))."""

    n: int = Field(..., description="Arm length")
    count: int = Field(..., description="Number of subalgebras")
    subalgebras: List[SubalgebraEntry] = Field(..., description="Subalgebras by decreasing m")


class EtaleReport(BaseModel):
    """Trace form data and the etale verdict of an algebra."""

    algebra: str = Field(..., description="Description of the algebra")
    etale: bool = Field(..., description="Whether the trace form is perfect")
    udim: str = Field(..., description="epsilon_A(1)")
    gamma_dim: int = Field(..., description="Dimension of Hom(1, A)")
    form: List[str] = Field(..., description="Trace form coefficients over A x A")
    witness: Optional[List[str]] = Field(
        None, description="A non-zero morphism killed by the trace form, when not etale"
    )


class RestrictionIdealsReport(BaseModel):
    """The ideals p and q of C(R^(n)) restricted to G(0)."""

    n: int = Field(..., description="Arm length")
    case: str = Field(..., description="'a' when p + q is proper, 'b' otherwise")
    p_summands: List[str] = Field(..., description="Top-length summands generating p")
    q_summands: List[str] = Field(..., description="Top-length summands generating q")
    p_orbits: List[str] = Field(..., description="Orbits supporting p")
    q_orbits: List[str] = Field(..., description="Orbits supporting q")
    quotient_orbits: List[str] = Field(..., description="Orbits supporting A'/(p + q)")
    pq_zero: bool = Field(..., description="Whether pq = 0")
    quotient_is_unit: bool = Field(..., description="Whether A'/(p + q) is the unit object")


class LengthStatsReport(BaseModel):
    """Length statistics of an object over G^s."""

    object: str = Field(..., description="Description of the object")
    lengths: List[int] = Field(..., description="Largest label length per group factor")
    total: int = Field(..., description="Largest total length")
    top_summands: Dict[str, int] = Field(..., description="Summands of the top total length")
    top_count: int = Field(..., description="Length of the top-length part T_n")


class AdjunctionReport(BaseModel):
    """Transfer of an algebra map Res(A) -> 1 to A -> C(G/U)."""

    algebra: str = Field(..., description="Description of the algebra")
    pins: int = Field(..., description="Number of fixed points of U")
    morphism: MorphismPayload = Field(..., description="The transferred map g")
    round_trip: bool = Field(..., description="Whether evaluation at the base point gives f")
    homomorphism: bool = Field(..., description="Whether g is an algebra homomorphism")


class SuiteItem(BaseModel):
    """One acceptance check."""

    name: str = Field(..., description="Check identifier")
    passed: bool = Field(..., description="Whether the check passed")
    skipped: bool = Field(False, description="Skipped because of a resource cap")
    capped: List[str] = Field(default_factory=list, description="Parts of the check left out by a cap")
    seconds: float = Field(..., description="Wall time of the check")
    detail: Union[str, Dict[str, object], None] = Field(None, description="Diagnostics")


class VerifyReport(BaseModel):
    """Result of an acceptance suite run."""

    suite: str = Field(..., description="Suite name")
    max_n: int = Field(..., description="Largest arm length exercised")
    version: int = Field(..., description="Canonical orbit order version")
    passed: bool = Field(..., description="Whether every non-skipped check passed")
    complete: bool = Field(..., description="Whether no check or part of a check was capped")
    capped: List[str] = Field(default_factory=list, description="Capped checks and parts of checks")
    items: List[SuiteItem] = Field(..., description="Checks in execution order")


class PremisesReport(BaseModel):
    """Premises of the simple-is-etale criterion checked on registry simples."""

    max_length: int = Field(..., description="Largest label length checked")
    self_dual: List[str] = Field(..., description="Labels L with Hom(1, L x L) != 0")
    dimensions: Dict[str, str] = Field(..., description="Categorical dimension per label")
    passed: bool = Field(..., description="Only the unit is self-dual and no dimension is -1/2")


class InstanceEntry(BaseModel):
    """One algebra examined by the classification instance checks."""

    source: str = Field(..., description="Ambient algebra")
    found: str = Field(..., description="Subalgebra or quotient found")
    passed: bool = Field(..., description="Whether it has the predicted form")
    skipped: bool = Field(False, description="Skipped because of a resource cap")
    confirmed: bool = Field(False, description="Cross-checked by a direct search on the product")


class TheoremInstancesReport(BaseModel):
    """Classification statements checked on concrete instances."""

    max_n: int = Field(..., description="Largest arm length examined")
    entries: List[InstanceEntry] = Field(..., description="Examined algebras")
    capped: List[str] = Field(default_factory=list, description="Sources not examined because of a cap")
    passed: bool = Field(..., description="Whether every non-skipped entry passed")
