//! Line-oriented specification parser.
//!
//! ```text
//! input r;
//! output g;
//! guarantee forall i != j . G !(g_i & g_j);
//! guarantee forall i . G (r_i -> F g_i);
//! ```
//!
//! `#` starts a comment. Atoms are `name_i`, `name_{i+1}`, `name_1`; the
//! outputs `tok`/`send` and the scheduling signal `sched` are implicitly
//! declared. The next-step operator `X` is rejected.

use super::ast::*;
use super::SpecError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Input,
    Output,
    Guarantee,
    Forall,
    Exists,
    True,
    False,
    OpG,
    OpF,
    OpU,
    OpW,
    OpX,
    Not,
    And,
    Or,
    Arrow,
    Iff,
    Neq,
    Dot,
    Semi,
    LParen,
    RParen,
    Ident(String),
    AtomTok(String, IndexTerm),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> SpecError {
        SpecError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn lex_number(&mut self) -> Result<i64, SpecError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("number out of range"))
    }

    fn lex_word(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    /// Index suffix after `name_`: digits, an identifier, or `{base±off}`.
    fn lex_index(&mut self) -> Result<IndexTerm, SpecError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(IndexTerm::constant(self.lex_number()? as u32)),
            Some(c) if c.is_ascii_alphabetic() => Ok(IndexTerm::var(self.lex_word())),
            Some(b'{') => {
                self.bump();
                let base = match self.peek() {
                    Some(c) if c.is_ascii_digit() => IndexBase::Const(self.lex_number()? as u32),
                    Some(c) if c.is_ascii_alphabetic() => IndexBase::Var(self.lex_word()),
                    _ => return Err(self.err("expected index variable or constant after `{`")),
                };
                let offset = match self.peek() {
                    Some(b'+') => {
                        self.bump();
                        self.lex_number()?
                    }
                    Some(b'-') => {
                        self.bump();
                        -self.lex_number()?
                    }
                    _ => 0,
                };
                if self.peek() != Some(b'}') {
                    return Err(self.err("expected `}` closing the index term"));
                }
                self.bump();
                Ok(IndexTerm { base, offset })
            }
            _ => Err(self.err("expected an index after `_`")),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, SpecError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'&' => {
                    self.bump();
                    Tok::And
                }
                b'|' => {
                    self.bump();
                    Tok::Or
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Neq
                    } else {
                        Tok::Not
                    }
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected `->`"));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        if self.peek() == Some(b'>') {
                            self.bump();
                            Tok::Iff
                        } else {
                            return Err(self.err("expected `<->`"));
                        }
                    } else {
                        return Err(self.err("expected `<->`"));
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let word = self.lex_word();
                    if self.peek() == Some(b'_') {
                        self.bump();
                        let idx = self.lex_index()?;
                        Tok::AtomTok(word, idx)
                    } else {
                        match word.as_str() {
                            "input" => Tok::Input,
                            "output" => Tok::Output,
                            "guarantee" => Tok::Guarantee,
                            "forall" => Tok::Forall,
                            "exists" => Tok::Exists,
                            "true" => Tok::True,
                            "false" => Tok::False,
                            "G" => Tok::OpG,
                            "F" => Tok::OpF,
                            "U" => Tok::OpU,
                            "W" => Tok::OpW,
                            "X" => Tok::OpX,
                            _ => Tok::Ident(word),
                        }
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)));
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> SpecError {
        let (line, col) = self.here();
        SpecError::Syntax { line, col, msg: msg.into() }
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<(), SpecError> {
        match self.peek() {
            Some(s) if s.tok == *want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn eat_ident(&mut self, what: &str) -> Result<String, SpecError> {
        match self.peek().cloned() {
            Some(Spanned { tok: Tok::Ident(name), .. }) => {
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn parse_prefix(&mut self) -> Result<Vec<Quantifier>, SpecError> {
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::Forall) => {
                self.pos += 1;
            }
            Some(Tok::Exists) => {
                return Err(self.err(
                    "existential quantifiers are not supported in specification files",
                ));
            }
            _ => return Err(self.err("expected `forall`")),
        }
        let first = self.eat_ident("an index variable")?;
        let mut prefix = vec![Quantifier::forall(first.clone())];
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Neq)) {
            self.pos += 1;
            let second = self.eat_ident("an index variable after `!=`")?;
            prefix.push(Quantifier::forall_distinct(second, first));
        }
        self.eat(&Tok::Dot, "`.` after the quantifier prefix")?;
        Ok(prefix)
    }

    // <-> (right-associative, loosest)
    fn parse_formula(&mut self) -> Result<Ltl, SpecError> {
        let lhs = self.parse_implies()?;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Iff)) {
            self.pos += 1;
            let rhs = self.parse_formula()?;
            Ok(Ltl::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_implies(&mut self) -> Result<Ltl, SpecError> {
        let lhs = self.parse_or()?;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Arrow)) {
            self.pos += 1;
            let rhs = self.parse_implies()?;
            Ok(Ltl::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<Ltl, SpecError> {
        let mut lhs = self.parse_and()?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Or)) {
            self.pos += 1;
            let rhs = self.parse_and()?;
            lhs = Ltl::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Ltl, SpecError> {
        let mut lhs = self.parse_until()?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::And)) {
            self.pos += 1;
            let rhs = self.parse_until()?;
            lhs = Ltl::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // U/W (right-associative)
    fn parse_until(&mut self) -> Result<Ltl, SpecError> {
        let lhs = self.parse_unary()?;
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::OpU) => {
                self.pos += 1;
                let rhs = self.parse_until()?;
                Ok(Ltl::until(lhs, rhs))
            }
            Some(Tok::OpW) => {
                self.pos += 1;
                let rhs = self.parse_until()?;
                Ok(Ltl::weak_until(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_unary(&mut self) -> Result<Ltl, SpecError> {
        let Some(s) = self.peek().cloned() else {
            return Err(self.err("unexpected end of formula"));
        };
        match s.tok {
            Tok::Not => {
                self.pos += 1;
                Ok(Ltl::not(self.parse_unary()?))
            }
            Tok::OpG => {
                self.pos += 1;
                Ok(Ltl::globally(self.parse_unary()?))
            }
            Tok::OpF => {
                self.pos += 1;
                Ok(Ltl::eventually(self.parse_unary()?))
            }
            Tok::OpX => Err(SpecError::NextOperator { line: s.line, col: s.col }),
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Ltl, SpecError> {
        let Some(s) = self.peek().cloned() else {
            return Err(self.err("unexpected end of formula"));
        };
        match s.tok {
            Tok::True => {
                self.pos += 1;
                Ok(Ltl::True)
            }
            Tok::False => {
                self.pos += 1;
                Ok(Ltl::False)
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.parse_formula()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::AtomTok(signal, index) => {
                self.pos += 1;
                Ok(Ltl::Atom(Atom::new(signal, index)))
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

/// Parses a specification file into its interface and guarantees.
pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let mut env_inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut guarantees = Vec::new();

    while !p.at_end() {
        let s = p.peek().cloned().unwrap();
        match s.tok {
            Tok::Input | Tok::Output => {
                let is_input = s.tok == Tok::Input;
                p.pos += 1;
                let name = p.eat_ident("a signal name")?;
                p.eat(&Tok::Semi, "`;`")?;
                if env_inputs.contains(&name)
                    || outputs.contains(&name)
                    || name == TOKEN_SIGNAL
                    || name == SEND_SIGNAL
                    || name == SCHED_SIGNAL
                {
                    return Err(SpecError::DuplicateSignal(name));
                }
                if is_input {
                    env_inputs.push(name);
                } else {
                    outputs.push(name);
                }
            }
            Tok::Guarantee => {
                p.pos += 1;
                let prefix = p.parse_prefix()?;
                let body_start = p.here();
                let body = p.parse_formula()?;
                p.eat(&Tok::Semi, "`;` after the guarantee")?;
                let spec = IndexedSpec::new(prefix, body);
                if let Err(SpecError::UnboundIndex { name, .. }) = spec.validate() {
                    return Err(SpecError::UnboundIndex {
                        line: body_start.0,
                        col: body_start.1,
                        name,
                    });
                }
                spec.validate()?;
                guarantees.push(spec);
            }
            _ => {
                return Err(p.err("expected `input`, `output` or `guarantee`"));
            }
        }
    }

    let interface = ProcessInterface::new(env_inputs, outputs);
    for g in &guarantees {
        for a in g.body.atoms() {
            if !interface.is_output(&a.signal)
                && !interface.is_env_input(&a.signal)
                && a.signal != SCHED_SIGNAL
            {
                return Err(SpecError::UnknownSignal { line: 0, col: 0, name: a.signal.clone() });
            }
        }
    }
    Ok(SpecFile { interface, guarantees })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_liveness_guarantee() {
        let f = parse_spec("input r;\noutput g;\nguarantee forall i . G (r_i -> F g_i);\n")
            .unwrap();
        assert_eq!(f.interface.env_inputs, vec!["r"]);
        assert_eq!(f.interface.outputs, vec!["g"]);
        assert_eq!(f.guarantees.len(), 1);
        let g = &f.guarantees[0];
        assert_eq!(g.prefix.len(), 1);
        assert!(!g.prefix[0].exists);
        assert_eq!(
            g.body,
            Ltl::globally(Ltl::implies(
                Ltl::atom("r", IndexTerm::var("i")),
                Ltl::eventually(Ltl::atom("g", IndexTerm::var("i"))),
            ))
        );
    }

    #[test]
    fn parses_trivial_guarantee() {
        let f = parse_spec("guarantee forall i . true;").unwrap();
        assert_eq!(f.guarantees[0].body, Ltl::True);
    }

    #[test]
    fn rejects_next_operator() {
        let err = parse_spec("input r;\nguarantee forall i . X r_i;").unwrap_err();
        match err {
            SpecError::NextOperator { line, col } => {
                assert_eq!(line, 2);
                assert!(col > 0);
            }
            other => panic!("expected NextOperator, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unbound_index() {
        let err = parse_spec("output g;\nguarantee forall i . G g_j;").unwrap_err();
        assert!(matches!(err, SpecError::UnboundIndex { name, .. } if name == "j"));
    }

    #[test]
    fn rejects_unknown_signal() {
        let err = parse_spec("guarantee forall i . G q_i;").unwrap_err();
        assert!(matches!(err, SpecError::UnknownSignal { name, .. } if name == "q"));
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        let err = parse_spec("input r;\nguarantee forall i . G (r_i -> ;\n").unwrap_err();
        match err {
            SpecError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn parses_distinct_pair_and_offsets() {
        let f = parse_spec(
            "output g;\nguarantee forall i != j . G !(g_i & g_j);\n\
             guarantee forall i . G (g_i -> g_{i+1});\n",
        )
        .unwrap();
        let q = &f.guarantees[0].prefix;
        assert_eq!(q.len(), 2);
        assert_eq!(q[1].distinct_from, vec!["i".to_string()]);
        let succ = &f.guarantees[1];
        assert!(succ
            .body
            .atoms()
            .iter()
            .any(|a| a.index == IndexTerm::var_offset("i", 1)));
    }

    #[test]
    fn builtin_token_signals_are_usable() {
        let f = parse_spec("guarantee forall i . G (tok_i -> F send_i);").unwrap();
        assert_eq!(f.guarantees.len(), 1);
    }

    #[test]
    fn print_then_parse_is_identity() {
        let src = "input r;\noutput g;\n\
                   guarantee forall i != j . G !(g_i & g_j);\n\
                   guarantee forall i . G (r_i -> F g_i) & (r_i U g_{i+1}) | g_1 <-> true;\n";
        let f = parse_spec(src).unwrap();
        for g in &f.guarantees {
            let printed = format!("guarantee {g};");
            let mut file = String::from("input r;\noutput g;\n");
            file.push_str(&printed);
            let again = parse_spec(&file).unwrap();
            assert_eq!(&again.guarantees[0], g, "round-trip failed for `{printed}`");
        }
    }
}
