import pytest

from treesample import ConfigError, DomainError, LeafSet, NodeAddress, ROOT


def test_parse_digit_string():
    addr = NodeAddress.parse("121")
    assert addr.digits == (1, 2, 1)
    assert addr.scale == 3
    assert str(addr) == "121"


def test_parse_root_forms():
    assert NodeAddress.parse("") == ROOT
    assert NodeAddress.parse("root") == ROOT
    assert ROOT.is_root and ROOT.scale == 0


def test_parse_dotted_for_wide_trees():
    addr = NodeAddress.parse("1.12.3")
    assert addr.digits == (1, 12, 3)
    assert str(addr) == "1.12.3"
    assert NodeAddress.parse(str(addr)) == addr


@pytest.mark.parametrize("bad", ["1a", "0", "102", "-1", 3.5])
def test_parse_rejects_invalid(bad):
    with pytest.raises(ConfigError):
        NodeAddress.parse(bad)


def test_parent_child_navigation():
    addr = NodeAddress.parse("12")
    assert addr.parent() == NodeAddress.parse("1")
    assert addr.child(3) == NodeAddress.parse("123")
    assert addr.ancestor_at(0) == ROOT
    with pytest.raises(DomainError):
        ROOT.parent()


def test_prefix_and_containment():
    a = NodeAddress.parse("112")
    b = NodeAddress.parse("121")
    assert a.common_prefix_length(b) == 1
    assert a.is_within(NodeAddress.parse("1"))
    assert not a.is_within(NodeAddress.parse("12"))
    assert a.is_within(ROOT)


def test_leaf_set_rejects_duplicates():
    with pytest.raises(DomainError):
        LeafSet.of(["11", "11"])


def test_leaf_set_restriction_keeps_order():
    ls = LeafSet.of(["21", "11", "12"])
    sub = ls.restricted_to(NodeAddress.parse("1"))
    assert sub.labels() == ["11", "12"]
    assert len(ls) == 3 and bool(ls)
    assert not LeafSet()
