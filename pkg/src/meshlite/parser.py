"""Recursive-descent parser producing the meshlite AST."""

from . import ast
from .errors import ParseError
from .lexer import END, Token, tokenize

ACCESSORS = {"localblocks", "localblockid", "low", "high"}

_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # --- token plumbing ---

    def peek(self, offset=0) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != END:
            self.pos += 1
        return tok

    def check(self, kind, lexeme=None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def match(self, kind, lexeme=None) -> bool:
        if self.check(kind, lexeme):
            self.advance()
            return True
        return False

    def expect(self, kind, lexeme=None, what=None) -> Token:
        if self.check(kind, lexeme):
            return self.advance()
        tok = self.peek()
        wanted = what or (lexeme if lexeme else kind)
        got = tok.lexeme if tok.kind != END else "end of input"
        raise ParseError(f"expected {wanted}, got {got!r}", tok.line, tok.column)

    def expect_semi(self):
        """Statements end with `;`, omissible before a closing brace."""
        if self.match("punctuation", ";"):
            return
        if self.check("punctuation", "}"):
            return
        self.expect("punctuation", ";")

    # --- program ---

    def parse_program(self) -> ast.Program:
        stmts = []
        first = self.peek()
        while not self.check(END):
            stmts.extend(self.parse_statement())
        return ast.Program(tuple(stmts), line=first.line, column=first.column)

    def parse_statement(self) -> list:
        """Parse one statement; var lists split into one node per name."""
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.lexeme == "var":
                return self.parse_var_decl()
            if tok.lexeme == "for":
                return [self.parse_for()]
            if tok.lexeme == "proc":
                return [self.parse_proc()]
            if tok.lexeme == "sync":
                return [self.parse_sync()]
            if tok.lexeme == "function":
                return [self.parse_funcdef()]
            raise ParseError(f"unexpected keyword {tok.lexeme!r}", tok.line, tok.column)
        if tok.kind == "identifier":
            expr = self.parse_postfix()
            if self.match("operator", ":="):
                value = self.parse_expr()
                self.expect_semi()
                self._check_lvalue(expr)
                return [ast.Assign(expr, value, line=tok.line, column=tok.column)]
            self.expect_semi()
            return [ast.ExprStmt(expr, line=tok.line, column=tok.column)]
        raise ParseError(f"expected a statement, got {tok.lexeme!r}", tok.line, tok.column)

    def _check_lvalue(self, expr):
        e = expr
        depth = 0
        while isinstance(e, ast.Index):
            e = e.base
            depth += 1
        if not isinstance(e, ast.Name) or depth > 2:
            raise ParseError("invalid assignment target", expr.line, expr.column)

    def parse_var_decl(self) -> list:
        kw = self.expect("keyword", "var")
        names = [self.expect("identifier", what="variable name")]
        while self.match("punctuation", ","):
            names.append(self.expect("identifier", what="variable name"))
        type_expr = None
        if self.match("operator", ":"):
            type_expr = self.parse_type_expr()
        init = None
        if self.match("operator", ":="):
            init = self.parse_expr()
        self.expect_semi()
        return [
            ast.VarDecl(n.lexeme, type_expr, init, line=n.line, column=n.column)
            for n in names
        ]

    def parse_for(self) -> ast.For:
        kw = self.expect("keyword", "for")
        var = self.expect("identifier", what="loop variable").lexeme
        self.expect("keyword", "from")
        start = self.parse_expr()
        self.expect("keyword", "to")
        stop = self.parse_expr()
        if self.check("punctuation", "{"):
            body = self.parse_block()
            self.match("punctuation", ";")
        else:
            body = tuple(self.parse_statement())
        return ast.For(var, start, stop, body, line=kw.line, column=kw.column)

    def parse_proc(self) -> ast.ProcBlock:
        kw = self.expect("keyword", "proc")
        rank = self.parse_expr()
        body = self.parse_block()
        self.match("punctuation", ";")
        return ast.ProcBlock(rank, body, line=kw.line, column=kw.column)

    def parse_sync(self) -> ast.Sync:
        kw = self.expect("keyword", "sync")
        var = None
        if self.check("identifier"):
            var = self.advance().lexeme
        self.expect_semi()
        return ast.Sync(var, line=kw.line, column=kw.column)

    def parse_funcdef(self) -> ast.FuncDef:
        kw = self.expect("keyword", "function")
        name = self.expect("identifier", what="function name").lexeme
        self.expect("punctuation", "(")
        params = []
        if not self.check("punctuation", ")"):
            while True:
                p = self.expect("identifier", what="parameter name")
                self.expect("operator", ":")
                te = self.parse_type_expr()
                params.append(ast.Param(p.lexeme, te, line=p.line, column=p.column))
                if not self.match("punctuation", ","):
                    break
        self.expect("punctuation", ")")
        body = self.parse_block()
        self.match("punctuation", ";")
        return ast.FuncDef(name, tuple(params), body, line=kw.line, column=kw.column)

    def parse_block(self) -> tuple:
        self.expect("punctuation", "{")
        stmts = []
        while not self.check("punctuation", "}"):
            if self.check(END):
                tok = self.peek()
                raise ParseError("unterminated block", tok.line, tok.column)
            stmts.extend(self.parse_statement())
        self.expect("punctuation", "}")
        return tuple(stmts)

    # --- type expressions ---

    def parse_type_expr(self) -> ast.TypeExpr:
        first = self.peek()
        apps = [self.parse_type_app()]
        while self.match("operator", "::"):
            apps.append(self.parse_type_app())
        return ast.TypeExpr(tuple(apps), line=first.line, column=first.column)

    def parse_type_app(self) -> ast.TypeApp:
        name = self.expect("identifier", what="type constructor")
        args = []
        has_args = False
        if self.match("punctuation", "["):
            has_args = True
            if not self.check("punctuation", "]"):
                while True:
                    args.append(self.parse_type_arg())
                    if not self.match("punctuation", ","):
                        break
            self.expect("punctuation", "]")
        return ast.TypeApp(name.lexeme, tuple(args), has_args,
                           line=name.line, column=name.column)

    def parse_type_arg(self):
        """Constructor argument: nested type chain or plain expression.

        A bare identifier stays an expression node; the chain builder
        decides by constructor signature whether it names a type.
        """
        if self.check("identifier"):
            nxt = self.peek(1)
            if nxt.kind == "punctuation" and nxt.lexeme == "[":
                te = self.parse_type_expr()
                return te
            # lookahead for `ident :: ...` which must be a chain
            if nxt.kind == "operator" and nxt.lexeme == "::":
                return self.parse_type_expr()
        return self.parse_expr()

    # --- expressions ---

    def parse_expr(self):
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while self.peek().kind == "operator" and self.peek().lexeme in _COMPARISONS:
            op = self.advance()
            right = self.parse_additive()
            left = ast.BinOp(op.lexeme, left, right, line=op.line, column=op.column)
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind == "operator" and self.peek().lexeme in ("+", "-"):
            op = self.advance()
            right = self.parse_multiplicative()
            left = ast.BinOp(op.lexeme, left, right, line=op.line, column=op.column)
        return left

    def parse_multiplicative(self):
        left = self.parse_postfix()
        while self.peek().kind == "operator" and self.peek().lexeme in ("*", "/"):
            op = self.advance()
            right = self.parse_postfix()
            left = ast.BinOp(op.lexeme, left, right, line=op.line, column=op.column)
        return left

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.check("punctuation", "["):
                tok = self.advance()
                index = self.parse_expr()
                self.expect("punctuation", "]")
                expr = ast.Index(expr, index, line=tok.line, column=tok.column)
            elif self.check("punctuation", "."):
                dot = self.advance()
                member = self.expect("identifier", what="accessor name")
                if member.lexeme not in ACCESSORS:
                    raise ParseError(
                        f"unknown accessor {member.lexeme!r} (expected one of "
                        f"{', '.join(sorted(ACCESSORS))})",
                        member.line, member.column)
                arg = None
                if member.lexeme == "localblockid":
                    self.expect("punctuation", "[")
                    arg = self.parse_expr()
                    self.expect("punctuation", "]")
                expr = ast.Accessor(expr, member.lexeme, arg,
                                    line=dot.line, column=dot.column)
            else:
                return expr

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "integer-literal":
            self.advance()
            return ast.IntLit(int(tok.lexeme), line=tok.line, column=tok.column)
        if tok.kind == "real-literal":
            self.advance()
            return ast.RealLit(float(tok.lexeme), line=tok.line, column=tok.column)
        if tok.kind == "string-literal":
            self.advance()
            return ast.StrLit(tok.lexeme[1:-1], line=tok.line, column=tok.column)
        if tok.kind == "identifier":
            name = self.advance()
            if self.check("punctuation", "("):
                self.advance()
                args = []
                if not self.check("punctuation", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.match("punctuation", ","):
                            break
                self.expect("punctuation", ")")
                return ast.Call(name.lexeme, tuple(args),
                                line=name.line, column=name.column)
            return ast.Name(name.lexeme, line=name.line, column=name.column)
        if tok.kind == "punctuation" and tok.lexeme == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect("punctuation", ")")
            return inner
        got = tok.lexeme if tok.kind != END else "end of input"
        raise ParseError(f"expected an expression, got {got!r}", tok.line, tok.column)


def parse(source_or_tokens) -> ast.Program:
    """Parse source text or a token list into a Program."""
    if isinstance(source_or_tokens, str):
        tokens = tokenize(source_or_tokens)
    else:
        tokens = list(source_or_tokens)
    return Parser(tokens).parse_program()
