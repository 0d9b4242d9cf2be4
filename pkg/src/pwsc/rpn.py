"""Compile expression trees to flat stack programs for the stepping kernels."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .expr import Bin, Call, Expression, Neg, Num, Pow, Var

OP_CONST = 0
OP_X = 1
OP_Y = 2
OP_LAM = 3
OP_EPS = 4
OP_ADD = 5
OP_SUB = 6
OP_MUL = 7
OP_DIV = 8
OP_NEG = 9
OP_POW = 10
OP_SIN = 11
OP_COS = 12
OP_EXP = 13
OP_TANH = 14
OP_SQRT = 15

_VAR_OPS = {"x": OP_X, "y": OP_Y, "lambda": OP_LAM, "eps": OP_EPS}
_FN_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "tanh": OP_TANH, "sqrt": OP_SQRT}
_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


class Program:
    """Flat postfix program: parallel opcode and argument arrays."""

    __slots__ = ("codes", "args", "stack_need")

    def __init__(self, codes, args, stack_need):
        self.codes = np.asarray(codes, dtype=np.int32)
        self.args = np.asarray(args, dtype=np.float64)
        self.stack_need = int(stack_need)


def _emit(expr: Expression, codes, args):
    if isinstance(expr, Num):
        codes.append(OP_CONST)
        args.append(expr.value)
        return 1
    if isinstance(expr, Var):
        codes.append(_VAR_OPS[expr.name])
        args.append(0.0)
        return 1
    if isinstance(expr, Neg):
        d = _emit(expr.arg, codes, args)
        codes.append(OP_NEG)
        args.append(0.0)
        return d
    if isinstance(expr, Pow):
        d = _emit(expr.base, codes, args)
        codes.append(OP_POW)
        args.append(float(expr.exponent))
        return d
    if isinstance(expr, Call):
        d = _emit(expr.arg, codes, args)
        codes.append(_FN_OPS[expr.fn])
        args.append(0.0)
        return d
    if isinstance(expr, Bin):
        dl = _emit(expr.lhs, codes, args)
        dr = _emit(expr.rhs, codes, args)
        codes.append(_BIN_OPS[expr.op])
        args.append(0.0)
        return max(dl, dr + 1)
    raise TypeError(f"not an expression node: {expr!r}")


@lru_cache(maxsize=512)
def compile_expression(expr: Expression) -> Program:
    codes: list = []
    args: list = []
    depth = _emit(expr, codes, args)
    return Program(codes, args, depth)
