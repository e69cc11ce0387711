"""Greedy symbolic regression over {+, -, *, /} expression trees.

The model starts as the constant mean of the targets and grows one accepted
modification per cycle: re-optimizing a constant, widening a subtree into
op(subtree, constant-or-variable), or swapping a leaf for a variable. The
single best candidate is accepted when its relative MSE reduction clears the
configured threshold and the node budget allows it; after every accepted
structural change all constants are re-optimized jointly. Division is only
ever admitted when no training row puts a denominator within ``DIV_GUARD`` of
zero, so fitted trees are numerically safe on their own training data.

The search is fully deterministic: no randomness, fixed candidate enumeration
order, ties broken toward fewer nodes and then earlier enumeration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

DIV_GUARD = 1e-12
OPS = ("+", "-", "*", "/")
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class Node:
    """Expression node: constant, variable reference, or binary operator."""

    __slots__ = ("kind", "value", "left", "right", "vals")

    def __init__(self, kind: str, value, left=None, right=None):
        self.kind = kind  # const | var | op
        self.value = value  # float | var index | operator symbol
        self.left = left
        self.right = right
        self.vals = None  # cached training-row evaluations

    def copy(self) -> "Node":
        return Node(
            self.kind,
            self.value,
            self.left.copy() if self.left else None,
            self.right.copy() if self.right else None,
        )

    def count(self) -> int:
        n = 1
        if self.left is not None:
            n += self.left.count()
        if self.right is not None:
            n += self.right.count()
        return n


def _apply_op(op: str, a, b):
    """Training-time op application; returns None when the guard trips."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if np.any(np.abs(b) < DIV_GUARD):
        return None
    return a / b


def _eval_train(node: Node, X: np.ndarray):
    """Evaluate and cache per-node vectors; None when a division guard trips."""
    if node.kind == "const":
        node.vals = np.full(X.shape[0], float(node.value))
    elif node.kind == "var":
        node.vals = X[:, node.value]
    else:
        lv = _eval_train(node.left, X)
        if lv is None:
            return None
        rv = _eval_train(node.right, X)
        if rv is None:
            return None
        node.vals = _apply_op(node.value, lv, rv)
    return node.vals


def _eval_predict(node: Node, X: np.ndarray, counter: list[int]) -> np.ndarray:
    """Prediction-time evaluation: clamp tiny denominators, count the events."""
    if node.kind == "const":
        return np.full(X.shape[0], float(node.value))
    if node.kind == "var":
        return X[:, node.value]
    a = _eval_predict(node.left, X, counter)
    b = _eval_predict(node.right, X, counter)
    if node.value == "/":
        tiny = np.abs(b) < DIV_GUARD
        if tiny.any():
            counter[0] += int(tiny.sum())
            sign = np.where(b < 0, -1.0, 1.0)
            b = np.where(tiny, sign * DIV_GUARD, b)
        return a / b
    return _apply_op(node.value, a, b)


def _paths(root: Node):
    """Preorder (node, path) pairs; path = [(ancestor, is_left_child), ...]."""
    out = []

    def walk(node, path):
        out.append((node, path))
        if node.kind == "op":
            walk(node.left, path + [(node, True)])
            walk(node.right, path + [(node, False)])

    walk(root, [])
    return out


def _recompute_root(path, v):
    """Root values after substituting v at the path's endpoint.

    v may be a vector or an (n, m) matrix of m simultaneous candidates; the
    return keeps that shape. None signals a division-guard rejection (matrix
    inputs instead get offending columns poisoned with nan).
    """
    matrix = v.ndim == 2
    for parent, is_left in reversed(path):
        other = parent.right.vals if is_left else parent.left.vals
        if matrix:
            other = other[:, None]
        a, b = (v, other) if is_left else (other, v)
        if parent.value == "/":
            if matrix:
                bad = np.abs(b) < DIV_GUARD
                if np.any(bad):
                    b = np.where(bad, np.nan, b)
            elif np.any(np.abs(b) < DIV_GUARD):
                return None
        with np.errstate(all="ignore"):
            v = (
                a + b if parent.value == "+"
                else a - b if parent.value == "-"
                else a * b if parent.value == "*"
                else a / b
            )
    return v


def _mse_columns(y: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Per-column MSE with non-finite columns pushed to +inf."""
    with np.errstate(all="ignore"):
        mse = np.mean((y[:, None] - R) ** 2, axis=0)
    return np.where(np.isfinite(mse), mse, np.inf)


def _mse_vector(y: np.ndarray, r) -> float:
    if r is None:
        return float("inf")
    with np.errstate(all="ignore"):
        m = float(np.mean((y - r) ** 2))
    return m if np.isfinite(m) else float("inf")


def _golden_minimize(f, center: float) -> tuple[float, float]:
    """Deterministic 1-D minimization: probe ladder, then golden section.

    The probes form a sorted grid around both the current value and zero; the
    best sample's grid neighbours bracket it, which is all golden section
    needs. Used only where the closed affine form does not apply.
    """
    scale = max(abs(center), 1.0)
    grid = {center, 0.0}
    for e in range(-6, 7):
        step = scale * (10.0**e)
        grid.update((center - step, center + step, step, -step))
    points = sorted(grid)
    values = [f(c) for c in points]
    i_best = int(np.argmin(values))
    best_c, best_f = points[i_best], values[i_best]
    if not np.isfinite(best_f):
        return center, float("inf")

    a = points[max(i_best - 1, 0)]
    b = points[min(i_best + 1, len(points) - 1)]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(90):
        if b - a <= 1e-12 * max(1.0, abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    for c, fc in ((x1, f1), (x2, f2)):
        if fc < best_f:
            best_c, best_f = c, fc
    return best_c, best_f


@dataclass
class DomeSpec:
    min_reduction_mse: float
    max_num_nodes: int

    def __post_init__(self) -> None:
        if not (0 < self.min_reduction_mse < 1):
            raise ValueError("min_reduction_mse must be in (0, 1)")
        if self.max_num_nodes < 1:
            raise ValueError("max_num_nodes must be >= 1")


class DomeRegressor:
    """fit/predict wrapper around the greedy expression-tree search."""

    def __init__(
        self,
        min_reduction_mse: float = 1e-4,
        max_num_nodes: int = 50,
        max_iterations: int = 1000,
    ):
        self.spec = DomeSpec(min_reduction_mse, max_num_nodes)
        self.max_iterations = max_iterations
        self.tree_: Node | None = None
        self.mse_history_: list[float] = []
        self.last_guard_count = 0

    # -- constant optimization -------------------------------------------

    @staticmethod
    def _path_is_affine(path) -> bool:
        """True when no ancestor divides BY the substituted branch."""
        return all(
            not (parent.value == "/" and not is_left) for parent, is_left in path
        )

    @staticmethod
    def _optimal_affine(y, path, at_zero: np.ndarray, direction: np.ndarray):
        """argmin_g MSE when the substituted node equals at_zero + g*direction.

        Valid only for affine paths, where the root output is A + g*B. Returns
        (g, mse) or None when degenerate.
        """
        A = _recompute_root(path, at_zero)
        A1 = _recompute_root(path, at_zero + direction)
        if A is None or A1 is None:
            return None
        B = A1 - A
        bb = float(B @ B)
        if bb <= 0.0 or not np.isfinite(bb):
            return None
        g = float((y - A) @ B) / bb
        if not np.isfinite(g):
            return None
        return g, _mse_vector(y, A + g * B)

    def _optimize_constant(self, y, path, node: Node) -> tuple[float, float]:
        """Best value for an existing constant leaf -> (value, resulting mse)."""
        n = len(y)
        if self._path_is_affine(path):
            got = self._optimal_affine(y, path, np.zeros(n), np.ones(n))
            if got is not None:
                return got
        f = lambda c: _mse_vector(y, _recompute_root(path, np.full(n, c)))
        return _golden_minimize(f, float(node.value))

    def _widen_const(self, y, path, base: np.ndarray, op: str):
        """Optimal c for node -> op(node, c); None when unusable."""
        n = len(y)
        affine = self._path_is_affine(path)
        if op in ("+", "-"):
            sign = 1.0 if op == "+" else -1.0
            if affine:
                got = self._optimal_affine(y, path, base, sign * np.ones(n))
                if got is not None:
                    return got
            f = lambda c: _mse_vector(y, _recompute_root(path, base + sign * c))
            return _golden_minimize(f, 0.0)
        if op == "*":
            if affine:
                got = self._optimal_affine(y, path, np.zeros(n), base)
                if got is not None:
                    return got
            f = lambda c: _mse_vector(y, _recompute_root(path, base * c))
            return _golden_minimize(f, 1.0)
        # node / c is linear in g = 1/c
        if affine:
            got = self._optimal_affine(y, path, np.zeros(n), base)
            if got is not None:
                g, mse = got
                if g == 0.0 or abs(g) > 1.0 / DIV_GUARD:
                    return None
                return 1.0 / g, mse

        def f(c):
            if abs(c) < DIV_GUARD:
                return float("inf")
            return _mse_vector(y, _recompute_root(path, base / c))

        return _golden_minimize(f, 1.0)

    # -- candidate generation ----------------------------------------------

    def _scaled_var_widenings(self, X, y, path, base, op):
        """mse per feature for node -> op(node, c * var_j), c optimized.

        Only valid on affine paths, where root = A + g*L(direction_j) admits
        the closed-form g. All features are scored with two matrix path
        recomputations. Returns (constants, mses) or None.
        """
        n, p = X.shape
        with np.errstate(all="ignore"):
            if op == "+":
                at_zero, D = base, X.copy()
            elif op == "-":
                at_zero, D = base, -X
            elif op == "*":
                at_zero, D = np.zeros(n), base[:, None] * X
            else:
                # node / (c * x_j) = g * (node / x_j) with g = 1/c
                ok = np.min(np.abs(X), axis=0) >= DIV_GUARD
                at_zero = np.zeros(n)
                D = base[:, None] / np.where(ok[None, :], X, np.nan)
        A = _recompute_root(path, at_zero)
        if A is None:
            return None
        R1 = _recompute_root(path, at_zero[:, None] + D)
        with np.errstate(all="ignore"):
            B = R1 - A[:, None]
            bb = np.sum(B * B, axis=0)
            g = np.where(bb > 0, (B * (y - A)[:, None]).sum(axis=0) / bb, np.nan)
            R = A[:, None] + g[None, :] * B
        mses = _mse_columns(y, R)
        mses = np.where(np.isfinite(g), mses, np.inf)
        if op == "/":
            with np.errstate(all="ignore"):
                consts = np.where(g != 0, 1.0 / g, np.nan)
            den_min = np.min(np.abs(X), axis=0) * np.abs(consts)
            mses = np.where(np.isfinite(consts) & (den_min >= DIV_GUARD), mses, np.inf)
        else:
            consts = g
        return consts, mses

    def _candidates(self, X, y, root):
        """All legal moves as (mse, resulting_count, enum_idx, move)."""
        n, p = X.shape
        count = root.count()
        budget = self.spec.max_num_nodes
        enum_idx = 0
        out = []

        for node, path in _paths(root):
            # (a) re-optimize an existing constant in place
            if node.kind == "const":
                value, mse = self._optimize_constant(y, path, node)
                if np.isfinite(mse):
                    out.append((mse, count, enum_idx, ("set_const", node, value)))
                enum_idx += 1

            # (c) swap a leaf for a variable
            if node.kind in ("const", "var"):
                R = _recompute_root(path, X) if path else X
                mses = _mse_columns(y, R)
                for j in range(p):
                    if node.kind == "var" and node.value == j:
                        enum_idx += 1
                        continue
                    if np.isfinite(mses[j]):
                        out.append((mses[j], count, enum_idx, ("set_var", node, j)))
                    enum_idx += 1

            base = node.vals
            affine = self._path_is_affine(path)

            # (b) widen: node -> op(node, const | var_j)
            if count + 2 <= budget:
                for op in OPS:
                    got = self._widen_const(y, path, base, op)
                    if got is not None and np.isfinite(got[1]):
                        value, mse = got
                        out.append(
                            (mse, count + 2, enum_idx,
                             ("widen", node, op, ("const", float(value))))
                        )
                    enum_idx += 1

                    with np.errstate(all="ignore"):
                        if op == "/":
                            ok = np.min(np.abs(X), axis=0) >= DIV_GUARD
                            V = base[:, None] / np.where(ok[None, :], X, np.nan)
                        elif op == "+":
                            V = base[:, None] + X
                        elif op == "-":
                            V = base[:, None] - X
                        else:
                            V = base[:, None] * X
                    R = _recompute_root(path, V)
                    mses = _mse_columns(y, R)
                    for j in range(p):
                        if np.isfinite(mses[j]):
                            out.append(
                                (mses[j], count + 2, enum_idx,
                                 ("widen", node, op, ("var", j)))
                            )
                        enum_idx += 1

            # (b') widen with a scaled variable: node -> op(node, c * var_j);
            # closed-form c needs an affine path, so non-affine spots skip it
            if count + 4 <= budget and affine:
                for op in OPS:
                    got = self._scaled_var_widenings(X, y, path, base, op)
                    if got is not None:
                        consts, mses = got
                        for j in range(p):
                            if np.isfinite(mses[j]):
                                out.append(
                                    (mses[j], count + 4, enum_idx,
                                     ("widen", node, op, ("scaled_var", j, float(consts[j]))))
                                )
                            enum_idx += 1
                    else:
                        enum_idx += p
        return out

    # -- move application ---------------------------------------------------

    @staticmethod
    def _apply_move(move) -> None:
        tag = move[0]
        if tag == "set_const":
            _, node, value = move
            node.kind, node.value = "const", float(value)
            node.left = node.right = None
        elif tag == "set_var":
            _, node, j = move
            node.kind, node.value = "var", int(j)
            node.left = node.right = None
        else:
            _, node, op, operand = move
            left = Node(node.kind, node.value, node.left, node.right)
            left.vals = node.vals
            if operand[0] == "const":
                right = Node("const", float(operand[1]))
            elif operand[0] == "var":
                right = Node("var", int(operand[1]))
            else:  # scaled_var: c * x_j
                _, j, c = operand
                right = Node("op", "*", Node("const", float(c)), Node("var", int(j)))
            node.kind, node.value = "op", op
            node.left, node.right = left, right

    def _joint_constant_pass(self, X, y, root, sweeps: int = 2) -> float:
        """Coordinate-descent re-optimization of every constant in the tree."""
        mse = _mse_vector(y, _eval_train(root, X))
        for _ in range(sweeps):
            for node, path in _paths(root):
                if node.kind != "const":
                    continue
                value, cand_mse = self._optimize_constant(y, path, node)
                if np.isfinite(cand_mse) and cand_mse < mse:
                    node.value = float(value)
                    mse = cand_mse
                    _eval_train(root, X)  # refresh caches for later paths
        return mse

    # -- main loop ------------------------------------------------------------

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DomeRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValueError("need at least 2 training rows")
        if not np.isfinite(y).all():
            raise ValueError("targets must be finite")

        root = Node("const", float(y.mean()))
        _eval_train(root, X)
        mse = _mse_vector(y, root.vals)
        self.mse_history_ = [mse]

        for _ in range(self.max_iterations):
            if mse == 0.0:
                break
            cands = self._candidates(X, y, root)
            if not cands:
                break
            best_mse, _, _, move = min(cands, key=lambda c: (c[0], c[1], c[2]))
            if not np.isfinite(best_mse):
                break
            if (mse - best_mse) / mse < self.spec.min_reduction_mse:
                break
            self._apply_move(move)
            if _eval_train(root, X) is None:
                raise AssertionError("accepted candidate tripped the division guard")
            if move[0] in ("set_var", "widen"):
                mse = self._joint_constant_pass(X, y, root)
            else:
                mse = _mse_vector(y, root.vals)
            self.mse_history_.append(mse)

        self.tree_ = root
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.tree_ is None:
            raise RuntimeError("predict before fit")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        counter = [0]
        out = _eval_predict(self.tree_, X, counter)
        self.last_guard_count = counter[0]
        return np.array(out, dtype=float, copy=True)

    # -- exports ---------------------------------------------------------------

    def to_equation(self, feature_names: list[str]) -> str:
        if self.tree_ is None:
            raise RuntimeError("fit first")
        return tree_to_equation(self.tree_, feature_names)

    def to_prefix(self):
        if self.tree_ is None:
            raise RuntimeError("fit first")
        return tree_to_prefix(self.tree_)


# -- equation text form ---------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _format_const(v: float) -> str:
    return f"{v:.6g}"


def tree_to_equation(node: Node, feature_names: list[str]) -> str:
    if node.kind == "const":
        return _format_const(float(node.value))
    if node.kind == "var":
        return feature_names[node.value]
    op = node.value
    prec = _PRECEDENCE[op]

    def render(child: Node, is_right: bool) -> str:
        s = tree_to_equation(child, feature_names)
        if child.kind != "op":
            # bare negative constants read badly to the right of - or /
            if child.kind == "const" and float(child.value) < 0 and is_right:
                return f"({s})"
            return s
        cprec = _PRECEDENCE[child.value]
        if cprec < prec or (is_right and cprec == prec and op in ("-", "/")):
            return f"({s})"
        return s

    return f"{render(node.left, False)} {op} {render(node.right, True)}"


class EquationParseError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[()+\-*/]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise EquationParseError(f"bad input at {text[pos:pos+10]!r}")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


def equation_to_tree(text: str, feature_names: list[str]) -> Node:
    """Recursive-descent parse of the infix form emitted by tree_to_equation."""
    tokens = _tokenize(text)
    index = {name: i for i, name in enumerate(feature_names)}
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else (None, None)

    def advance():
        if pos[0] >= len(tokens):
            raise EquationParseError("unexpected end of input")
        t = tokens[pos[0]]
        pos[0] += 1
        return t

    def parse_expr() -> Node:
        node = parse_term()
        while peek() in (("op", "+"), ("op", "-")):
            _, op = advance()
            node = Node("op", op, node, parse_term())
        return node

    def parse_term() -> Node:
        node = parse_factor()
        while peek() in (("op", "*"), ("op", "/")):
            _, op = advance()
            node = Node("op", op, node, parse_factor())
        return node

    def parse_factor() -> Node:
        if peek() == ("op", "-"):
            advance()
            inner = parse_factor()
            if inner.kind == "const":
                inner.value = -inner.value
                return inner
            return Node("op", "-", Node("const", 0.0), inner)
        return parse_atom()

    def parse_atom() -> Node:
        kind, value = advance()
        if kind == "num":
            return Node("const", float(value))
        if kind == "name":
            if value not in index:
                raise EquationParseError(f"unknown variable {value!r}")
            return Node("var", index[value])
        if (kind, value) == ("op", "("):
            node = parse_expr()
            if advance() != ("op", ")"):
                raise EquationParseError("missing closing parenthesis")
            return node
        raise EquationParseError(f"unexpected token {value!r}")

    node = parse_expr()
    if pos[0] != len(tokens):
        raise EquationParseError("trailing input after expression")
    return node


# -- machine-readable prefix form -----------------------------------------------

def tree_to_prefix(node: Node):
    if node.kind == "const":
        return ["const", float(node.value)]
    if node.kind == "var":
        return ["var", int(node.value)]
    return [node.value, tree_to_prefix(node.left), tree_to_prefix(node.right)]


def prefix_to_tree(form) -> Node:
    tag = form[0]
    if tag == "const":
        return Node("const", float(form[1]))
    if tag == "var":
        return Node("var", int(form[1]))
    if tag in OPS:
        return Node("op", tag, prefix_to_tree(form[1]), prefix_to_tree(form[2]))
    raise ValueError(f"bad prefix form tag {tag!r}")


def evaluate_tree(node: Node, X: np.ndarray) -> np.ndarray:
    """Clamped evaluation matching predict-time semantics."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return _eval_predict(node, X, [0])
