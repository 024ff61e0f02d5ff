"""Node addressing and leaf-set containers.

A node is addressed by the path of 1-based child indices leading to it from
the root; the root itself has the empty path.  Addresses print as digit
strings ("121") when every index is a single digit, and as dotted paths
("1.2.12") otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, DomainError


@dataclass(frozen=True, slots=True)
class NodeAddress:
    """Path of 1-based child indices from the root; empty path = root."""

    digits: tuple[int, ...] = ()

    def __post_init__(self):
        for d in self.digits:
            if not isinstance(d, int) or isinstance(d, bool) or d < 1:
                raise ConfigError(f"address digits must be integers >= 1, got {d!r}")

    @classmethod
    def parse(cls, value) -> "NodeAddress":
        """Accept an existing address, a digit string, a dotted path, or a
        sequence of child indices."""
        if isinstance(value, NodeAddress):
            return value
        if isinstance(value, (tuple, list)):
            return cls(tuple(int(d) for d in value))
        if not isinstance(value, str):
            raise ConfigError(f"cannot parse a node address from {value!r}")
        text = value.strip()
        if text in ("", "root"):
            return cls()
        try:
            if "." in text:
                return cls(tuple(int(part) for part in text.split(".")))
            return cls(tuple(int(ch) for ch in text))
        except (ValueError, ConfigError):
            raise ConfigError(f"invalid node address {value!r}") from None

    @property
    def scale(self) -> int:
        return len(self.digits)

    @property
    def is_root(self) -> bool:
        return not self.digits

    def parent(self) -> "NodeAddress":
        if self.is_root:
            raise DomainError("the root has no parent")
        return NodeAddress(self.digits[:-1])

    def child(self, k: int) -> "NodeAddress":
        return NodeAddress(self.digits + (k,))

    def ancestor_at(self, scale: int) -> "NodeAddress":
        if not 0 <= scale <= self.scale:
            raise DomainError(f"node {self} has no ancestor at scale {scale}")
        return NodeAddress(self.digits[:scale])

    def common_prefix_length(self, other: "NodeAddress") -> int:
        n = 0
        for a, b in zip(self.digits, other.digits):
            if a != b:
                break
            n += 1
        return n

    def is_within(self, ancestor: "NodeAddress") -> bool:
        """True if this node lies in the subtree rooted at ``ancestor``."""
        return self.digits[: len(ancestor.digits)] == ancestor.digits

    def __str__(self):
        if not self.digits:
            return "root"
        if all(d <= 9 for d in self.digits):
            return "".join(str(d) for d in self.digits)
        return ".".join(str(d) for d in self.digits)


ROOT = NodeAddress()


@dataclass(frozen=True, slots=True)
class LeafSet:
    """Ordered collection of distinct leaf addresses."""

    addresses: tuple[NodeAddress, ...] = ()

    def __post_init__(self):
        if len(set(self.addresses)) != len(self.addresses):
            raise DomainError("leaf set contains duplicate addresses")

    @classmethod
    def of(cls, items) -> "LeafSet":
        return cls(tuple(NodeAddress.parse(item) for item in items))

    def __len__(self):
        return len(self.addresses)

    def __iter__(self):
        return iter(self.addresses)

    def __bool__(self):
        return bool(self.addresses)

    def restricted_to(self, node: NodeAddress) -> "LeafSet":
        """The sub-collection lying in the subtree of ``node``, order kept."""
        return LeafSet(tuple(a for a in self.addresses if a.is_within(node)))

    def labels(self) -> list[str]:
        return [str(a) for a in self.addresses]

    def __str__(self):
        return "{" + ";".join(self.labels()) + "}"
