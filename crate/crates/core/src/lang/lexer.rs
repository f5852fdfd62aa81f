use std::fmt;

use super::LangError;

/// A 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    DotDot,
    Eq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    And,
    Or,
    Not,
    Implies,
    ImpliedBy,
    Equiv,
    /// `<-` or `←`
    Arrow,
    /// `->`
    MapsTo,
    Forall,
    Exists,
    Hash,
    /// A top-level `procedure` block, kept as raw text.
    Procedure {
        name: String,
        text: String,
    },
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(n) => return write!(f, "`{n}`"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Procedure { name, .. } => return write!(f, "procedure `{name}`"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Eq => "=",
            Tok::Neq => "~=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "=<",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Not => "~",
            Tok::Implies => "=>",
            Tok::ImpliedBy => "<=",
            Tok::Equiv => "<=>",
            Tok::Arrow => "<-",
            Tok::MapsTo => "->",
            Tok::Forall => "!",
            Tok::Exists => "?",
            Tok::Hash => "#",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: u32,
    col: u32,
    depth: usize,
}

/// Tokenizes a whole program.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LangError> {
    let mut lx = Lexer {
        src,
        chars: src.char_indices().collect(),
        i: 0,
        line: 1,
        col: 1,
        depth: 0,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        match &t.tok {
            Tok::LBrace => lx.depth += 1,
            Tok::RBrace => lx.depth = lx.depth.saturating_sub(1),
            _ => {}
        }
        if lx.depth == 0
            && t.tok == Tok::Ident("procedure".into())
            && !matches!(out.last(), Some(Token { tok: Tok::Eq, .. }))
        {
            let name_tok = lx.next_token()?;
            let Tok::Ident(name) = name_tok.tok else {
                return Err(LangError::Parse {
                    pos: name_tok.pos,
                    msg: "expected a procedure name".into(),
                });
            };
            let text = lx.raw_procedure(t.pos)?;
            out.push(Token {
                tok: Tok::Procedure { name, text },
                pos: t.pos,
            });
            continue;
        }
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

fn latex_escape(name: &str) -> Option<Tok> {
    Some(match name {
        "leftarrow" | "gets" => Tok::Arrow,
        "lnot" | "neg" => Tok::Not,
        "land" | "wedge" => Tok::And,
        "lor" | "vee" => Tok::Or,
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "Rightarrow" | "limplies" => Tok::Implies,
        "Leftarrow" => Tok::ImpliedBy,
        "Leftrightarrow" | "equiv" => Tok::Equiv,
        "neq" | "ne" => Tok::Neq,
        "leq" | "le" => Tok::Le,
        "geq" | "ge" => Tok::Ge,
        _ => return None,
    })
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn byte_offset(&self) -> usize {
        self.chars.get(self.i).map(|&(b, _)| b).unwrap_or(self.src.len())
    }

    fn skip_trivia(&mut self) -> Result<(), LangError> {
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(LangError::Lex {
                                    pos: start,
                                    msg: "unterminated comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, LangError> {
        self.skip_trivia()?;
        let pos = self.pos();
        let tok = |tok| Ok(Token { tok, pos });
        let Some(c) = self.bump() else {
            return tok(Tok::Eof);
        };
        let next = self.peek();
        match c {
            '{' => tok(Tok::LBrace),
            '}' => tok(Tok::RBrace),
            '(' => tok(Tok::LParen),
            ')' => tok(Tok::RParen),
            '[' => tok(Tok::LBrack),
            ']' => tok(Tok::RBrack),
            ',' => tok(Tok::Comma),
            ';' => tok(Tok::Semi),
            '+' => tok(Tok::Plus),
            '*' => tok(Tok::Star),
            '/' => tok(Tok::Slash),
            '%' => tok(Tok::Percent),
            '&' | '∧' => tok(Tok::And),
            '|' | '∨' => tok(Tok::Or),
            '¬' => tok(Tok::Not),
            '!' | '∀' => tok(Tok::Forall),
            '?' | '∃' => tok(Tok::Exists),
            '#' => tok(Tok::Hash),
            '⇒' => tok(Tok::Implies),
            '⇐' => tok(Tok::ImpliedBy),
            '⇔' => tok(Tok::Equiv),
            '←' => tok(Tok::Arrow),
            '→' => tok(Tok::MapsTo),
            '≠' => tok(Tok::Neq),
            '≤' => tok(Tok::Le),
            '≥' => tok(Tok::Ge),
            ':' if next == Some(':') => {
                self.bump();
                tok(Tok::ColonColon)
            }
            ':' => tok(Tok::Colon),
            '.' if next == Some('.') => {
                self.bump();
                tok(Tok::DotDot)
            }
            '.' => tok(Tok::Dot),
            '~' if next == Some('=') => {
                self.bump();
                tok(Tok::Neq)
            }
            '~' => tok(Tok::Not),
            '-' if next == Some('>') => {
                self.bump();
                tok(Tok::MapsTo)
            }
            '-' => tok(Tok::Minus),
            '=' => match next {
                Some('<') => {
                    self.bump();
                    tok(Tok::Le)
                }
                Some('>') => {
                    self.bump();
                    tok(Tok::Implies)
                }
                _ => tok(Tok::Eq),
            },
            '<' => match (next, self.peek_at(1)) {
                (Some('='), Some('>')) => {
                    self.bump();
                    self.bump();
                    tok(Tok::Equiv)
                }
                (Some('='), _) => {
                    self.bump();
                    tok(Tok::ImpliedBy)
                }
                (Some('-'), _) => {
                    self.bump();
                    tok(Tok::Arrow)
                }
                _ => tok(Tok::Lt),
            },
            '>' if next == Some('=') => {
                self.bump();
                tok(Tok::Ge)
            }
            '>' => tok(Tok::Gt),
            '"' => self.string(pos),
            '$' => self.latex(pos),
            c if c.is_ascii_digit() => {
                let mut s = String::from(c);
                while let Some(d) = self.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    self.bump();
                }
                let n = s.parse::<i64>().map_err(|_| LangError::Lex {
                    pos,
                    msg: format!("integer literal {s} does not fit in 64 bits"),
                })?;
                tok(Tok::Int(n))
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(d) = self.peek().filter(|d| d.is_alphanumeric() || *d == '_') {
                    s.push(d);
                    self.bump();
                }
                tok(Tok::Ident(s))
            }
            c => Err(LangError::Lex {
                pos,
                msg: format!("unexpected character {c:?}"),
            }),
        }
    }

    fn string(&mut self, pos: Pos) -> Result<Token, LangError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(LangError::Lex {
                        pos,
                        msg: "unterminated string literal".into(),
                    })
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c @ ('"' | '\\')) => s.push(c),
                    _ => {
                        return Err(LangError::Lex {
                            pos,
                            msg: "bad escape in string literal".into(),
                        })
                    }
                },
                Some(c) => s.push(c),
            }
        }
        Ok(Token { tok: Tok::Str(s), pos })
    }

    /// `$\leftarrow$` and friends, as they appear in typeset text.
    fn latex(&mut self, pos: Pos) -> Result<Token, LangError> {
        let err = |msg: String| LangError::Lex { pos, msg };
        if self.bump() != Some('\\') {
            return Err(err("expected a LaTeX operator after `$`".into()));
        }
        let mut name = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphabetic()) {
            name.push(c);
            self.bump();
        }
        while self.peek().is_some_and(|c| c == ' ') {
            self.bump();
        }
        if self.bump() != Some('$') {
            return Err(err(format!("unterminated LaTeX operator `$\\{name}`")));
        }
        latex_escape(&name)
            .map(|tok| Token { tok, pos })
            .ok_or_else(|| err(format!("unknown LaTeX operator `\\{name}`")))
    }

    /// Skips `(params) { body }` of a procedure, honouring Lua strings and
    /// comments, and returns the raw text.
    fn raw_procedure(&mut self, start: Pos) -> Result<String, LangError> {
        let unterminated = || LangError::Parse {
            pos: start,
            msg: "unterminated procedure block".into(),
        };
        self.skip_trivia()?;
        let from = self.byte_offset();
        if self.peek() != Some('(') {
            return Err(LangError::Parse {
                pos: self.pos(),
                msg: "expected `(` after procedure name".into(),
            });
        }
        while let Some(c) = self.bump() {
            if c == ')' {
                break;
            }
        }
        self.skip_trivia()?;
        if self.peek() != Some('{') {
            return Err(LangError::Parse {
                pos: self.pos(),
                msg: "expected `{` to open the procedure body".into(),
            });
        }
        let mut depth = 0usize;
        loop {
            let c = self.bump().ok_or_else(unterminated)?;
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                '"' | '\'' => {
                    while let Some(d) = self.bump() {
                        if d == '\\' {
                            self.bump();
                        } else if d == c {
                            break;
                        }
                    }
                }
                '-' if self.peek() == Some('-') => {
                    while self.peek().is_some_and(|d| d != '\n') {
                        self.bump();
                    }
                }
                _ => {}
            }
        }
        Ok(self.src[from..self.byte_offset()].to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_ranges() {
        assert_eq!(
            toks("{1..5} A + B > 8. x =< y <- ~p"),
            vec![
                Tok::LBrace,
                Tok::Int(1),
                Tok::DotDot,
                Tok::Int(5),
                Tok::RBrace,
                Tok::Ident("A".into()),
                Tok::Plus,
                Tok::Ident("B".into()),
                Tok::Gt,
                Tok::Int(8),
                Tok::Dot,
                Tok::Ident("x".into()),
                Tok::Le,
                Tok::Ident("y".into()),
                Tok::Arrow,
                Tok::Not,
                Tok::Ident("p".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn latex_operators_map_to_connectives() {
        assert_eq!(
            toks(r"$\leftarrow$ $\lnot$ $\land$ $\forall$"),
            vec![Tok::Arrow, Tok::Not, Tok::And, Tok::Forall, Tok::Eof]
        );
    }

    #[test]
    fn procedures_are_opaque() {
        let t = toks("procedure toKey(x, y) {\n  return x..\"-}\"..y; -- }\n}\nvocabulary V {}");
        assert_eq!(
            t[0],
            Tok::Procedure {
                name: "toKey".into(),
                text: "(x, y) {\n  return x..\"-}\"..y; -- }\n}".into()
            }
        );
        assert_eq!(t[1], Tok::Ident("vocabulary".into()));
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("a // c\n/* x\n y */ b"), toks("a b"));
    }

    #[test]
    fn bad_character_is_a_lex_error() {
        assert!(matches!(
            tokenize("a @"),
            Err(LangError::Lex {
                pos: Pos { line: 1, col: 3 },
                ..
            })
        ));
    }
}
