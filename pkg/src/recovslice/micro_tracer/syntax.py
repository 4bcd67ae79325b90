"""MiniLang source model: lexer, AST, and a recursive-descent parser.

MiniLang is the small imperative language the tracer executes: `var`
declarations, assignments, `if`/`while`, functions (optionally dotted method
names like `List.add`), `new` expressions, and int/string/bool/null literals.
There are no closures, exceptions, floats, or threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import MiniSyntaxError

__all__ = ["MiniProgram", "Function", "parse_program", "parse_file"]

KEYWORDS = {"fn", "var", "if", "else", "while", "return", "new",
            "true", "false", "null"}

_PUNCT = ["&&", "||", "==", "!=", "<=", ">=",
          "+", "-", "*", "/", "%", "<", ">", "=", "!",
          "(", ")", "{", "}", "[", "]", ".", ",", ";"]


# --- AST --------------------------------------------------------------------

@dataclass
class IntLit:
    value: int


@dataclass
class StrLit:
    value: str


@dataclass
class BoolLit:
    value: bool


@dataclass
class NullLit:
    pass


@dataclass
class VarRef:
    name: str


@dataclass
class FieldAccess:
    obj: object
    name: str


@dataclass
class IndexAccess:
    obj: object
    index: object


@dataclass
class Unary:
    op: str
    operand: object


@dataclass
class Binary:
    op: str
    left: object
    right: object


@dataclass
class Call:
    name: str
    args: list


@dataclass
class MethodCall:
    recv: object
    name: str
    args: list


@dataclass
class New:
    type_name: str
    args: list


@dataclass
class Stmt:
    line: int
    text: str


@dataclass
class VarDecl(Stmt):
    name: str = ""
    expr: object = None


@dataclass
class Assign(Stmt):
    target: object = None  # VarRef | FieldAccess | IndexAccess
    expr: object = None


@dataclass
class If(Stmt):
    cond: object = None
    then_body: list = field(default_factory=list)
    else_body: list = field(default_factory=list)


@dataclass
class While(Stmt):
    cond: object = None
    body: list = field(default_factory=list)


@dataclass
class Return(Stmt):
    expr: object = None


@dataclass
class ExprStmt(Stmt):
    expr: object = None


@dataclass
class Function:
    name: str  # plain ("main") or dotted method name ("List.add")
    params: list[str]
    body: list
    file_id: str
    line: int
    source: str  # verbatim text from `fn` through the closing brace


@dataclass
class MiniProgram:
    """A multi-file program; `files` maps file id to source text."""

    files: dict[str, str]
    entry: str = "main"


@dataclass
class ParsedProgram:
    functions: dict[str, Function]
    lines: dict[str, list[str]]  # file id -> source lines
    type_homes: dict[str, str]  # type name -> defining file
    routines: dict[str, str]  # function name -> file
    entry: str = "main"


# --- lexer -------------------------------------------------------------------

@dataclass
class Token:
    kind: str  # ident | int | string | punct | eof
    value: str
    line: int


def _tokenize(source: str, file_id: str) -> list[Token]:
    toks = []
    i, line, n = 0, 1, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
        elif c in " \t\r":
            i += 1
        elif source.startswith("//", i):  # line comment
            while i < n and source[i] != "\n":
                i += 1
        elif c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("int", source[i:j], line))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            toks.append(Token("ident", source[i:j], line))
            i = j
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and source[j] != '"':
                if source[j] == "\\":
                    if j + 1 >= n or source[j + 1] not in ('"', "\\", "n"):
                        raise MiniSyntaxError("bad string escape", file_id, line)
                    buf.append("\n" if source[j + 1] == "n" else source[j + 1])
                    j += 2
                elif source[j] == "\n":
                    raise MiniSyntaxError("unterminated string", file_id, line)
                else:
                    buf.append(source[j])
                    j += 1
            if j >= n:
                raise MiniSyntaxError("unterminated string", file_id, line)
            toks.append(Token("string", "".join(buf), line))
            i = j + 1
        else:
            for p in _PUNCT:
                if source.startswith(p, i):
                    toks.append(Token("punct", p, line))
                    i += len(p)
                    break
            else:
                raise MiniSyntaxError(f"unexpected character {c!r}",
                                      file_id, line)
    toks.append(Token("eof", "", line))
    return toks


# --- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, file_id: str):
        self.toks = _tokenize(source, file_id)
        self.pos = 0
        self.file_id = file_id
        self.lines = source.split("\n")

    def _peek(self) -> Token:
        return self.toks[self.pos]

    def _next(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def _expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self._peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value or kind
            raise MiniSyntaxError(f"expected {want!r}, got {tok.value!r}",
                                  self.file_id, tok.line)
        return self._next()

    def _at(self, kind: str, value: Optional[str] = None) -> bool:
        tok = self._peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def _line_text(self, line: int) -> str:
        return self.lines[line - 1] if 0 < line <= len(self.lines) else ""

    # functions

    def parse(self) -> list[Function]:
        fns = []
        while not self._at("eof"):
            fns.append(self._function())
        return fns

    def _function(self) -> Function:
        start = self._expect("ident", "fn")
        name = self._expect("ident").value
        if self._at("punct", "."):
            self._next()
            name += "." + self._expect("ident").value
        self._expect("punct", "(")
        params = []
        while not self._at("punct", ")"):
            if params:
                self._expect("punct", ",")
            params.append(self._expect("ident").value)
        self._expect("punct", ")")
        body = self._block()
        end_line = self.toks[self.pos - 1].line  # the closing brace
        source = "\n".join(self.lines[start.line - 1:end_line])
        return Function(name=name, params=params, body=body,
                        file_id=self.file_id, line=start.line, source=source)

    def _block(self) -> list:
        self._expect("punct", "{")
        stmts = []
        while not self._at("punct", "}"):
            stmts.append(self._statement())
        self._expect("punct", "}")
        return stmts

    # statements

    def _statement(self):
        tok = self._peek()
        text = self._line_text(tok.line)
        if tok.kind == "ident" and tok.value == "var":
            self._next()
            name = self._expect("ident").value
            self._expect("punct", "=")
            expr = self._expression()
            self._expect("punct", ";")
            return VarDecl(line=tok.line, text=text, name=name, expr=expr)
        if tok.kind == "ident" and tok.value == "if":
            self._next()
            self._expect("punct", "(")
            cond = self._expression()
            self._expect("punct", ")")
            then_body = self._block()
            else_body = []
            if self._at("ident", "else"):
                self._next()
                else_body = self._block()
            return If(line=tok.line, text=text, cond=cond,
                      then_body=then_body, else_body=else_body)
        if tok.kind == "ident" and tok.value == "while":
            self._next()
            self._expect("punct", "(")
            cond = self._expression()
            self._expect("punct", ")")
            body = self._block()
            return While(line=tok.line, text=text, cond=cond, body=body)
        if tok.kind == "ident" and tok.value == "return":
            self._next()
            expr = None
            if not self._at("punct", ";"):
                expr = self._expression()
            self._expect("punct", ";")
            return Return(line=tok.line, text=text, expr=expr)
        expr = self._expression()
        if self._at("punct", "="):
            if not isinstance(expr, (VarRef, FieldAccess, IndexAccess)):
                raise MiniSyntaxError("invalid assignment target",
                                      self.file_id, tok.line)
            self._next()
            rhs = self._expression()
            self._expect("punct", ";")
            return Assign(line=tok.line, text=text, target=expr, expr=rhs)
        self._expect("punct", ";")
        return ExprStmt(line=tok.line, text=text, expr=expr)

    # expressions (precedence climbing)

    def _expression(self):
        return self._or()

    def _or(self):
        left = self._and()
        while self._at("punct", "||"):
            self._next()
            left = Binary("||", left, self._and())
        return left

    def _and(self):
        left = self._equality()
        while self._at("punct", "&&"):
            self._next()
            left = Binary("&&", left, self._equality())
        return left

    def _equality(self):
        left = self._comparison()
        while self._at("punct", "==") or self._at("punct", "!="):
            op = self._next().value
            left = Binary(op, left, self._comparison())
        return left

    def _comparison(self):
        left = self._additive()
        while any(self._at("punct", op) for op in ("<", ">", "<=", ">=")):
            op = self._next().value
            left = Binary(op, left, self._additive())
        return left

    def _additive(self):
        left = self._multiplicative()
        while self._at("punct", "+") or self._at("punct", "-"):
            op = self._next().value
            left = Binary(op, left, self._multiplicative())
        return left

    def _multiplicative(self):
        left = self._unary()
        while any(self._at("punct", op) for op in ("*", "/", "%")):
            op = self._next().value
            left = Binary(op, left, self._unary())
        return left

    def _unary(self):
        if self._at("punct", "!") or self._at("punct", "-"):
            op = self._next().value
            return Unary(op, self._unary())
        return self._postfix()

    def _postfix(self):
        expr = self._primary()
        while True:
            if self._at("punct", "."):
                self._next()
                name = self._expect("ident").value
                if self._at("punct", "("):
                    args = self._arguments()
                    expr = MethodCall(expr, name, args)
                else:
                    expr = FieldAccess(expr, name)
            elif self._at("punct", "["):
                self._next()
                index = self._expression()
                self._expect("punct", "]")
                expr = IndexAccess(expr, index)
            else:
                return expr

    def _primary(self):
        tok = self._peek()
        if tok.kind == "int":
            self._next()
            return IntLit(int(tok.value))
        if tok.kind == "string":
            self._next()
            return StrLit(tok.value)
        if tok.kind == "ident":
            if tok.value in ("true", "false"):
                self._next()
                return BoolLit(tok.value == "true")
            if tok.value == "null":
                self._next()
                return NullLit()
            if tok.value == "new":
                self._next()
                type_name = self._expect("ident").value
                args = self._arguments() if self._at("punct", "(") else []
                return New(type_name, args)
            self._next()
            if self._at("punct", "("):
                return Call(tok.value, self._arguments())
            return VarRef(tok.value)
        if tok.kind == "punct" and tok.value == "(":
            self._next()
            expr = self._expression()
            self._expect("punct", ")")
            return expr
        raise MiniSyntaxError(f"unexpected token {tok.value!r}",
                              self.file_id, tok.line)

    def _arguments(self) -> list:
        self._expect("punct", "(")
        args = []
        while not self._at("punct", ")"):
            if args:
                self._expect("punct", ",")
            args.append(self._expression())
        self._expect("punct", ")")
        return args


def parse_file(source: str, file_id: str) -> list[Function]:
    return _Parser(source, file_id).parse()


def _collect_new_types(node, found: list[str]) -> None:
    if isinstance(node, New):
        found.append(node.type_name)
    for value in vars(node).values() if hasattr(node, "__dataclass_fields__") \
            else ():
        if isinstance(value, list):
            for item in value:
                if hasattr(item, "__dataclass_fields__"):
                    _collect_new_types(item, found)
        elif hasattr(value, "__dataclass_fields__"):
            _collect_new_types(value, found)


def parse_program(program: MiniProgram) -> ParsedProgram:
    """Parse every file and build the function/type registries."""
    functions: dict[str, Function] = {}
    lines: dict[str, list[str]] = {}
    type_homes: dict[str, str] = {}
    routines: dict[str, str] = {}
    for file_id, source in program.files.items():
        lines[file_id] = source.split("\n")
        for fn in parse_file(source, file_id):
            if fn.name in functions:
                raise MiniSyntaxError(f"duplicate function {fn.name!r}",
                                      file_id, fn.line)
            functions[fn.name] = fn
            routines[fn.name] = file_id
            if fn.name.endswith(".init"):
                type_homes.setdefault(fn.name.split(".", 1)[0], file_id)
    # Types without an initializer are homed where they are first created.
    for file_id, source in program.files.items():
        for fn in (f for f in functions.values() if f.file_id == file_id):
            found: list[str] = []
            for stmt in fn.body:
                _collect_new_types(stmt, found)
            for type_name in found:
                type_homes.setdefault(type_name, file_id)
    return ParsedProgram(functions=functions, lines=lines,
                         type_homes=type_homes, routines=routines,
                         entry=program.entry)
