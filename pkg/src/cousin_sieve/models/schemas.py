"""Pydantic models for the domain records and reports."""

from enum import Enum
from fractions import Fraction
from math import prod
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sympy import isprime

SCHEMA_VERSION = 1


class LemmaId(str, Enum):
    """Identifiers of the properties and lemmas the lab can check."""
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"
    L1 = "L1"
    L3 = "L3"
    L32 = "L32"
    L4 = "L4"
    L5 = "L5"

    @property
    def unconditional(self) -> bool:
        """True for floor-function facts whose failure breaks the build."""
        return self.value.startswith("P")


class OutputFormat(str, Enum):
    """Output formats understood by the CLI."""
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


class CousinPair(BaseModel):
    """A prime pair (lo, lo + 4)."""

    model_config = ConfigDict(frozen=True)

    lo: int = Field(..., description="The smaller prime")
    hi: int = Field(..., description="The larger prime, lo + 4")

    @model_validator(mode="after")
    def validate_pair(self) -> "CousinPair":
        if self.hi - self.lo != 4:
            raise ValueError("cousin pair members must differ by 4")
        if not (isprime(self.lo) and isprime(self.hi)):
            raise ValueError(f"({self.lo}, {self.hi}) is not a prime pair")
        return self


class DeletionResidue(BaseModel):
    """Residues deleted modulo one prime."""

    model_config = ConfigDict(frozen=True)

    modulus: int = Field(..., description="Prime modulus")
    residues: Tuple[int, ...] = Field(..., description="Residues to delete")

    @field_validator("modulus")
    @classmethod
    def validate_modulus(cls, v: int) -> int:
        if not isprime(v):
            raise ValueError(f"modulus {v} is not prime")
        return v

    @field_validator("residues")
    @classmethod
    def validate_residues(cls, v: Tuple[int, ...], info) -> Tuple[int, ...]:
        modulus = info.data.get("modulus")
        if modulus is None:
            return v
        reduced = tuple(sorted({r % modulus for r in v}))
        if modulus == 2:
            if reduced != (0,):
                raise ValueError("modulus 2 deletes exactly residue 0")
            return reduced
        allowed = {0, (-4) % modulus}
        if not set(reduced) <= allowed:
            raise ValueError(
                f"residues mod {modulus} must be a subset of {sorted(allowed)}"
            )
        return reduced


class DeletionOutcome(BaseModel):
    """Survivors of a deletion run."""

    n: int
    count: int
    survivors: Optional[List[int]] = Field(
        None, description="Surviving values, omitted above the materialisation cap"
    )


class ExpansionTerm(BaseModel):
    """One signed term of the inclusion-exclusion expansion."""

    model_config = ConfigDict(frozen=True)

    sign: int = Field(..., description="+1 or -1")
    plain: Tuple[int, ...] = Field(default=(), description="Primes p with k = 0 mod p")
    tilde: Tuple[int, ...] = Field(default=(), description="Primes p with k = -4 mod p")

    @field_validator("sign")
    @classmethod
    def validate_sign(cls, v: int) -> int:
        if v not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return v

    @field_validator("plain", "tilde")
    @classmethod
    def validate_primes(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(set(v)) != len(v):
            raise ValueError("primes within a term must be distinct")
        for p in v:
            if not isprime(p):
                raise ValueError(f"{p} is not prime")
        return tuple(sorted(v))

    @model_validator(mode="after")
    def validate_sets(self) -> "ExpansionTerm":
        if 2 in self.tilde:
            raise ValueError("2 never carries the tilde operator")
        if set(self.plain) & set(self.tilde):
            raise ValueError("plain and tilde primes must be disjoint")
        return self

    @property
    def modulus(self) -> int:
        return prod(self.plain) * prod(self.tilde)

    @property
    def label(self) -> str:
        parts = [f"[1/{p}]" for p in self.plain] + [f"[~1/{p}]" for p in self.tilde]
        return ("+" if self.sign > 0 else "-") + ("".join(parts) or "1")


class CrtOffset(BaseModel):
    """First position of a plain/tilde prime pair and its additive offset."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    p_i: int
    p_j: int
    lam: int = Field(..., serialization_alias="lambda")
    theta: int


class CousinCountReport(BaseModel):
    """D(n) by formula next to the brute-force oracle count."""

    schema_version: int = SCHEMA_VERSION
    n: int
    p_v: Optional[int] = Field(None, description="Largest prime not exceeding sqrt(n)")
    d0: int
    d_sqrt: int
    d1: int
    d_formula: int
    d_oracle: int
    reconciled: bool

    @model_validator(mode="after")
    def validate_formula(self) -> "CousinCountReport":
        if self.d_formula != self.d0 + self.d_sqrt - self.d1:
            raise ValueError("d_formula must equal d0 + d_sqrt - d1")
        if self.d1 not in (0, 1):
            raise ValueError("d1 is 0 or 1")
        return self


class LemmaWitness(BaseModel):
    """One evaluated lemma instance."""

    model_config = ConfigDict(populate_by_name=True)

    lemma_id: LemmaId
    params: Dict[str, Union[int, List[int]]] = Field(default_factory=dict)
    lhs: int = 0
    rhs: int = 0
    passed: bool = Field(False, serialization_alias="pass")
    in_domain: bool = True


class LemmaGrid(BaseModel):
    """Parameter grid of one sweep; unused fields stay None."""

    m_max: Optional[int] = None
    p_max: Optional[int] = None
    primes: Optional[List[int]] = None
    factor: Optional[int] = None


class SweepReport(BaseModel):
    """Outcome of sweeping one lemma over its grid."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = SCHEMA_VERSION
    lemma_id: LemmaId
    range_description: str
    unconditional: bool
    instances_checked: int
    out_of_domain: int = 0
    failures: List[LemmaWitness] = Field(default_factory=list)
    extremes: List[LemmaWitness] = Field(
        default_factory=list, description="Notable witnesses, e.g. extremal values"
    )
    elapsed: float = Field(0.0, description="Wall time in seconds")

    @property
    def ok(self) -> bool:
        return not self.failures


class BoundPoint(BaseModel):
    """One row of the figure series."""

    schema_version: int = SCHEMA_VERSION
    v: int
    p_v: int
    w_num: int
    w_den: int
    d_prime: int
    d_lower_tl2: int
    d_actual: int

    @property
    def w(self) -> Fraction:
        return Fraction(self.w_num, self.w_den)


class RecurrenceCheck(BaseModel):
    """Direct product of W(v+1) against the one-step recurrence from W(v)."""

    v: int
    direct_num: int
    direct_den: int
    recurrence_num: int
    recurrence_den: int
    passed: bool


class DescentChain(BaseModel):
    """Ceiling chain m(j-1) = ceil(m(j)(1 - 3/p_j)) used by the lower bound."""

    n: int
    steps: List[Tuple[int, int]] = Field(
        default_factory=list, description="(p_j, m(j-1)) after applying p_j"
    )
    above_square: bool = Field(
        True, description="Every intermediate m stayed >= the next prime squared"
    )
    d0_lower: int = 0


class BoundCheck(BaseModel):
    """Evaluation of the floor lower bound at one n."""

    schema_version: int = SCHEMA_VERSION
    n: int
    v: int
    p_v: int
    bound_floor: int
    bound_ceil: int
    d_sqrt: int
    chain_lower: int
    d_actual: int
    passed: bool
