"""Textual program format: parser and pretty printer.

A program file is line-oriented: array and variable declarations first, then
`public` policy lines, then statements in a small C-like syntax::

    array a base=1 len=2 label=L;
    array s base=3 len=1 label=H init=[42];
    var i1 = 1;
    public i1, a;
    x := a[i1];
    z := x + y;
    x2 := protect(a[i1]);
    *L(p) := x + 1;
    if (e) { ... } else { ... }
    while (e) { ... }
    fail;

Expression grammar, loosest to tightest binding: `e ? e : e` (right
associative), `e < e` (non-associative), `e + e`, `e & e`.  `length(a)` and
`base(a)` project array metadata.  Array names used inside expressions denote
the array handle itself.

The parser is the single source of truth for the format; `pretty_program`
inverts it (parsing a pretty-printed program yields an equal AST).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import (
    Add,
    ArrayDecl,
    ArrayRead,
    ArrayWrite,
    Assign,
    Base,
    BitAnd,
    Command,
    Expr,
    Fail,
    If,
    LABEL_PUBLIC,
    LABEL_SECRET,
    LangError,
    Length,
    Lit,
    Lt,
    Policy,
    Protect,
    PtrRead,
    PtrWrite,
    Pure,
    Rhs,
    Seq,
    Skip,
    Ternary,
    Value,
    Var,
    While,
    WORD_MASK,
    command_vars,
    seq_all,
)


class ParseError(LangError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class SemanticError(LangError):
    """Well-formedness violations: overlaps, duplicate or unknown names."""


@dataclass
class Program:
    """A parsed program: command, array declarations, initial state, policy."""

    command: Command
    arrays: dict[str, ArrayDecl]
    init_vars: dict[str, Value]
    policy: Policy
    warnings: list[str] = field(default_factory=list)
    _init_cells: dict[int, Value] = field(default_factory=dict)

    def variables(self) -> list[str]:
        """The variable universe: declared plus assigned names, sorted."""
        return sorted(set(self.init_vars) | command_vars(self.command))

    def initial_var_map(self) -> dict[str, Value]:
        """Total map over the universe; undeclared variables start at 0."""
        rho: dict[str, Value] = {x: 0 for x in self.variables()}
        rho.update(self.init_vars)
        return rho

    def initial_memory(self) -> dict[int, Value]:
        """All declared array cells (initialized or zero); cell 0 is reserved."""
        mem: dict[int, Value] = {0: 0}
        for a in self.arrays.values():
            for i in range(a.length):
                mem.setdefault(a.base + i, 0)
        mem.update(self._init_cells)
        mem[0] = 0
        return mem


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_SYMBOLS = [":=", "?", ":", ";", ",", "[", "]", "(", ")", "{", "}", "*", "&",
            "+", "<", "="]


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "nat", "sym", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("nat", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.arrays: dict[str, ArrayDecl] = {}
        self.init_vars: dict[str, Value] = {}
        self.init_cells: dict[int, Value] = {}
        self.public_names: list[str] = []
        self.warnings: list[str] = []

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise self.error(f"expected {want!r}, found {tok.text!r}")
        return self.next()

    def at_sym(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == text

    def at_name(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.text == text

    # -- declarations -------------------------------------------------------

    def parse_program(self) -> Program:
        while self.at_name("array") or self.at_name("var"):
            if self.at_name("array"):
                self.parse_array_decl()
            else:
                self.parse_var_decl()
        while self.at_name("public"):
            self.parse_policy_line()
        commands: list[Command] = []
        while self.peek().kind != "eof":
            commands.append(self.parse_stmt())
        if not commands:
            raise self.error("empty program: at least one statement required")
        command = seq_all(commands)
        policy = self._resolve_policy(command)
        program = Program(
            command=command,
            arrays=self.arrays,
            init_vars=self.init_vars,
            policy=policy,
            warnings=self.warnings,
        )
        program._init_cells = self.init_cells
        return program

    def parse_array_decl(self) -> None:
        self.expect("name", "array")
        name = self.expect("name").text
        if name in self.arrays or name in self.init_vars:
            raise self.error(f"duplicate declaration of {name!r}")
        self.expect("name", "base")
        self.expect("sym", "=")
        base = self.parse_nat_token()
        self.expect("name", "len")
        self.expect("sym", "=")
        length = self.parse_nat_token()
        self.expect("name", "label")
        self.expect("sym", "=")
        label = self.parse_label()
        init: list[int] = []
        if self.at_name("init"):
            self.next()
            self.expect("sym", "=")
            self.expect("sym", "[")
            init.append(self.parse_nat_token())
            while self.at_sym(","):
                self.next()
                init.append(self.parse_nat_token())
            self.expect("sym", "]")
        self.expect("sym", ";")
        if base + length > WORD_MASK + 1:
            raise SemanticError(f"array {name!r} overflows the address space")
        if len(init) > length:
            raise SemanticError(f"array {name!r}: {len(init)} initializers for "
                                f"{length} cells")
        decl = ArrayDecl(name, base, length, label)
        for other in self.arrays.values():
            if base < other.base + other.length and other.base < base + length:
                raise SemanticError(
                    f"arrays {other.name!r} and {name!r} overlap")
        self.arrays[name] = decl
        for i, v in enumerate(init):
            self.init_cells[base + i] = v

    def parse_var_decl(self) -> None:
        self.expect("name", "var")
        name = self.expect("name").text
        if name in self.arrays or name in self.init_vars:
            raise self.error(f"duplicate declaration of {name!r}")
        self.expect("sym", "=")
        tok = self.peek()
        if tok.kind == "nat":
            self.init_vars[name] = self.parse_nat_token()
        elif self.at_name("true"):
            self.next()
            self.init_vars[name] = True
        elif self.at_name("false"):
            self.next()
            self.init_vars[name] = False
        else:
            raise self.error("variable initializer must be a literal")
        self.expect("sym", ";")

    def parse_policy_line(self) -> None:
        self.expect("name", "public")
        self.public_names.append(self.expect("name").text)
        while self.at_sym(","):
            self.next()
            self.public_names.append(self.expect("name").text)
        self.expect("sym", ";")

    def _resolve_policy(self, command: Command) -> Policy:
        known_vars = set(self.init_vars) | command_vars(command)
        public_vars: set[str] = set()
        public_arrays: set[str] = set()
        for name in self.public_names:
            if name in self.arrays:
                public_arrays.add(name)
            elif name in known_vars:
                public_vars.add(name)
            else:
                raise SemanticError(f"policy names unknown identifier {name!r}")
        return Policy(frozenset(public_vars), frozenset(public_arrays))

    def parse_nat_token(self) -> int:
        tok = self.expect("nat")
        value = int(tok.text)
        if value > WORD_MASK:
            raise ParseError(f"literal {tok.text} exceeds the 64-bit range",
                             tok.line, tok.col)
        return value

    def parse_label(self) -> str:
        tok = self.expect("name")
        if tok.text not in (LABEL_PUBLIC, LABEL_SECRET):
            raise ParseError(f"label must be L or H, found {tok.text!r}",
                             tok.line, tok.col)
        return tok.text

    # -- statements ---------------------------------------------------------

    def parse_stmt(self) -> Command:
        tok = self.peek()
        if self.at_name("skip"):
            self.next()
            self.expect("sym", ";")
            return Skip()
        if self.at_name("fail"):
            self.next()
            self.expect("sym", ";")
            return Fail()
        if self.at_name("if"):
            return self.parse_if()
        if self.at_name("while"):
            return self.parse_while()
        if self.at_sym("*"):
            return self.parse_ptr_write()
        if tok.kind == "name":
            name = self.next().text
            if self.at_sym("["):
                return self.parse_array_write(name)
            self.expect("sym", ":=")
            rhs, protected = self.parse_rhs()
            self.expect("sym", ";")
            return Protect(name, rhs) if protected else Assign(name, rhs)
        raise self.error("expected a statement")

    def parse_if(self) -> Command:
        self.expect("name", "if")
        self.expect("sym", "(")
        cond = self.parse_expr()
        self.expect("sym", ")")
        then = self.parse_block()
        self.expect("name", "else")
        other = self.parse_block()
        return If(cond, then, other)

    def parse_while(self) -> Command:
        self.expect("name", "while")
        self.expect("sym", "(")
        cond = self.parse_expr()
        self.expect("sym", ")")
        body = self.parse_block()
        return While(cond, body)

    def parse_block(self) -> Command:
        self.expect("sym", "{")
        commands: list[Command] = []
        while not self.at_sym("}"):
            commands.append(self.parse_stmt())
        self.expect("sym", "}")
        if not commands:
            return Skip()
        return seq_all(commands)

    def parse_ptr_write(self) -> Command:
        self.expect("sym", "*")
        label = self.parse_opt_ptr_label()
        self.expect("sym", "(")
        addr = self.parse_expr()
        self.expect("sym", ")")
        self.expect("sym", ":=")
        value = self.parse_expr()
        self.expect("sym", ";")
        if isinstance(addr, Lit):
            self.warnings.append(
                f"pointer write at literal address {addr.value!r}")
        return PtrWrite(label, addr, value)

    def parse_opt_ptr_label(self) -> str:
        if self.peek().kind == "name" and \
                self.peek().text in (LABEL_PUBLIC, LABEL_SECRET) and \
                self.peek(1).kind == "sym" and self.peek(1).text == "(":
            return self.next().text
        return LABEL_PUBLIC

    def parse_array_write(self, name: str) -> Command:
        if name not in self.arrays:
            raise self.error(f"unknown array {name!r}")
        self.expect("sym", "[")
        index = self.parse_expr()
        self.expect("sym", "]")
        self.expect("sym", ":=")
        value = self.parse_expr()
        self.expect("sym", ";")
        return ArrayWrite(self.arrays[name], index, value)

    # -- right-hand sides ---------------------------------------------------

    def parse_rhs(self):
        if self.at_name("protect") and self.peek(1).kind == "sym" \
                and self.peek(1).text == "(":
            self.next()
            self.expect("sym", "(")
            inner = self.parse_plain_rhs()
            self.expect("sym", ")")
            return (inner, True)
        return (self.parse_plain_rhs(), False)

    def parse_plain_rhs(self) -> Rhs:
        if self.at_sym("*"):
            self.next()
            label = self.parse_opt_ptr_label()
            self.expect("sym", "(")
            addr = self.parse_expr()
            self.expect("sym", ")")
            if isinstance(addr, Lit):
                self.warnings.append(
                    f"pointer read at literal address {addr.value!r}")
            return PtrRead(label, addr)
        tok = self.peek()
        if tok.kind == "name" and tok.text in self.arrays and \
                self.peek(1).kind == "sym" and self.peek(1).text == "[":
            array = self.arrays[self.next().text]
            self.expect("sym", "[")
            index = self.parse_expr()
            self.expect("sym", "]")
            return ArrayRead(array, index)
        return Pure(self.parse_expr())

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> Expr:
        cond = self.parse_cmp()
        if self.at_sym("?"):
            self.next()
            then = self.parse_expr()
            self.expect("sym", ":")
            other = self.parse_expr()
            return Ternary(cond, then, other)
        return cond

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        if self.at_sym("<"):
            self.next()
            right = self.parse_add()
            return Lt(left, right)
        return left

    def parse_add(self) -> Expr:
        e = self.parse_band()
        while self.at_sym("+"):
            self.next()
            e = Add(e, self.parse_band())
        return e

    def parse_band(self) -> Expr:
        e = self.parse_atom()
        while self.at_sym("&"):
            self.next()
            e = BitAnd(e, self.parse_atom())
        return e

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "nat":
            return Lit(self.parse_nat_token())
        if self.at_sym("("):
            self.next()
            e = self.parse_expr()
            self.expect("sym", ")")
            return e
        if tok.kind == "name":
            if tok.text == "true":
                self.next()
                return Lit(True)
            if tok.text == "false":
                self.next()
                return Lit(False)
            if tok.text in ("length", "base") and self.peek(1).text == "(":
                self.next()
                self.expect("sym", "(")
                arg = self.parse_expr()
                self.expect("sym", ")")
                return Length(arg) if tok.text == "length" else Base(arg)
            name = self.next().text
            if name in self.arrays:
                return Lit(self.arrays[name])
            return Var(name)
        raise self.error("expected an expression")


def parse_program(text: str) -> Program:
    return _Parser(text).parse_program()


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

# Precedence levels, loosest binding first.
_TERN, _CMP, _ADD, _BAND, _ATOM = range(5)


def pretty_expr(e: Expr, ctx: int = _TERN) -> str:
    if isinstance(e, Lit):
        v = e.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, ArrayDecl):
            return v.name
        return str(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Ternary):
        text = (f"{pretty_expr(e.cond, _CMP)} ? {pretty_expr(e.then, _TERN)}"
                f" : {pretty_expr(e.other, _TERN)}")
        return f"({text})" if ctx > _TERN else text
    if isinstance(e, Lt):
        text = f"{pretty_expr(e.left, _ADD)} < {pretty_expr(e.right, _ADD)}"
        return f"({text})" if ctx > _CMP else text
    if isinstance(e, Add):
        text = f"{pretty_expr(e.left, _ADD)} + {pretty_expr(e.right, _BAND)}"
        return f"({text})" if ctx > _ADD else text
    if isinstance(e, BitAnd):
        text = f"{pretty_expr(e.left, _BAND)} & {pretty_expr(e.right, _ATOM)}"
        return f"({text})" if ctx > _BAND else text
    if isinstance(e, Length):
        return f"length({pretty_expr(e.arg)})"
    if isinstance(e, Base):
        return f"base({pretty_expr(e.arg)})"
    raise LangError(f"cannot print {e!r}")


def pretty_rhs(r: Rhs) -> str:
    if isinstance(r, Pure):
        return pretty_expr(r.expr)
    if isinstance(r, PtrRead):
        return f"*{r.label}({pretty_expr(r.addr)})"
    if isinstance(r, ArrayRead):
        return f"{r.array.name}[{pretty_expr(r.index)}]"
    raise LangError(f"cannot print {r!r}")


def _stmt_list(c: Command) -> list[Command]:
    if isinstance(c, Seq):
        return _stmt_list(c.first) + _stmt_list(c.second)
    return [c]


def pretty_command(c: Command, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    for stmt in _stmt_list(c):
        if isinstance(stmt, Skip):
            lines.append(f"{pad}skip;")
        elif isinstance(stmt, Fail):
            lines.append(f"{pad}fail;")
        elif isinstance(stmt, Assign):
            lines.append(f"{pad}{stmt.target} := {pretty_rhs(stmt.rhs)};")
        elif isinstance(stmt, Protect):
            lines.append(
                f"{pad}{stmt.target} := protect({pretty_rhs(stmt.rhs)});")
        elif isinstance(stmt, PtrWrite):
            lines.append(f"{pad}*{stmt.label}({pretty_expr(stmt.addr)})"
                         f" := {pretty_expr(stmt.value)};")
        elif isinstance(stmt, ArrayWrite):
            lines.append(f"{pad}{stmt.array.name}[{pretty_expr(stmt.index)}]"
                         f" := {pretty_expr(stmt.value)};")
        elif isinstance(stmt, If):
            lines.append(f"{pad}if ({pretty_expr(stmt.cond)}) {{")
            lines.extend(pretty_command(stmt.then, indent + 1))
            lines.append(f"{pad}}} else {{")
            lines.extend(pretty_command(stmt.other, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(stmt, While):
            lines.append(f"{pad}while ({pretty_expr(stmt.cond)}) {{")
            lines.extend(pretty_command(stmt.body, indent + 1))
            lines.append(f"{pad}}}")
        else:
            raise LangError(f"cannot print {stmt!r}")
    return lines


def pretty_program(program: Program) -> str:
    lines: list[str] = []
    for a in program.arrays.values():
        decl = f"array {a.name} base={a.base} len={a.length} label={a.label}"
        cells = [program._init_cells.get(a.base + i) for i in range(a.length)]
        if any(v is not None for v in cells):
            init = ",".join(str(v if v is not None else 0) for v in cells)
            decl += f" init=[{init}]"
        lines.append(decl + ";")
    for name, value in program.init_vars.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = str(value)
        lines.append(f"var {name} = {text};")
    public = [x for x in program.init_vars if x in program.policy.public_vars]
    public += sorted(program.policy.public_vars - set(public))
    public += [a for a in program.arrays if a in program.policy.public_arrays]
    if public:
        lines.append(f"public {', '.join(public)};")
    lines.extend(pretty_command(program.command))
    return "\n".join(lines) + "\n"
