//! Recursive-descent parser for `CREATE GRAPH TYPE` documents.

use crate::error::DdlError;
use crate::value::DataType;

use super::types::{EdgeType, ElementType, GraphType, NodeType, PropertyType};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(u32),
    Colon,
    Subtype,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Question,
    Amp,
    Dash,
    Arrow,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Colon => ":",
            Tok::Subtype => "<:",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Question => "?",
            Tok::Amp => "&",
            Tok::Dash => "-",
            Tok::Arrow => "->",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, expected: &[&str], found: String) -> DdlError {
    DdlError::Syntax {
        line,
        column,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found,
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, DdlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '?' => Tok::Question,
            '&' => Tok::Amp,
            '>' => Tok::Gt,
            ':' if chars.get(i + 1) == Some(&':') => {
                i += 1;
                col += 1;
                Tok::Subtype
            }
            ':' => Tok::Colon,
            '<' if chars.get(i + 1) == Some(&':') => {
                i += 1;
                col += 1;
                Tok::Subtype
            }
            '<' => Tok::Lt,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                col += 1;
                Tok::Arrow
            }
            '-' => Tok::Dash,
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s
                    .parse()
                    .map_err(|_| syntax(l0, c0, &["number"], format!("`{s}`")))?;
                out.push(Spanned { tok: Tok::Number(n), line: l0, column: c0 });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                let s: String = chars[start..i].iter().collect();
                out.push(Spanned { tok: Tok::Ident(s), line: l0, column: c0 });
                continue;
            }
            other => return Err(syntax(l0, c0, &["token"], format!("`{other}`"))),
        };
        i += 1;
        col += 1;
        out.push(Spanned { tok, line: l0, column: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> DdlError {
        let s = &self.toks[self.pos];
        syntax(s.line, s.column, expected, s.tok.describe())
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DdlError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{}`", tok.symbol())]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DdlError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DdlError> {
        match self.peek() {
            Tok::Ident(s) if s.eq_ignore_ascii_case(kw) => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&[kw])),
        }
    }

    fn graph_type(&mut self) -> Result<GraphType, DdlError> {
        self.keyword("CREATE")?;
        self.keyword("GRAPH")?;
        self.keyword("TYPE")?;
        let mut gt = GraphType::new(self.ident("graph type name")?);
        self.expect(Tok::LParen)?;
        while *self.peek() != Tok::RParen {
            self.item(&mut gt)?;
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {}
                _ => return Err(self.error(&["`,`", "`)`"])),
            }
        }
        self.expect(Tok::RParen)?;
        if *self.peek() != Tok::Eof {
            return Err(self.error(&["end of input"]));
        }
        Ok(gt)
    }

    fn item(&mut self, gt: &mut GraphType) -> Result<(), DdlError> {
        match self.peek() {
            Tok::LParen => self.node_or_edge(gt),
            Tok::Ident(_) => {
                gt.element_types.push(self.element_type()?);
                Ok(())
            }
            _ => Err(self.error(&["element type", "`(`", "`)`"])),
        }
    }

    fn element_type(&mut self) -> Result<ElementType, DdlError> {
        let is_final = matches!(self.peek(), Tok::Ident(s) if s == "FINAL")
            && matches!(self.peek_at(1), Tok::Ident(_));
        if is_final {
            self.bump();
        }
        let mut et = ElementType::new(self.ident("label")?);
        et.is_final = is_final;
        if *self.peek() == Tok::Subtype {
            self.bump();
            et.extends.push(self.ident("parent label")?);
            while *self.peek() == Tok::Amp {
                self.bump();
                et.extends.push(self.ident("parent label")?);
            }
        }
        self.expect(Tok::LBrace)?;
        while *self.peek() != Tok::RBrace {
            et.properties.push(self.property()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {}
                _ => return Err(self.error(&["`,`", "`}`"])),
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(et)
    }

    fn property(&mut self) -> Result<PropertyType, DdlError> {
        let key = self.ident("property key")?;
        self.expect(Tok::Colon)?;
        let data_type = match self.peek().clone() {
            Tok::Ident(s) => match s.parse::<DataType>() {
                Ok(t) => {
                    self.bump();
                    t
                }
                Err(()) => return Err(self.error(&["STRING", "INTEGER", "TIMESTAMP", "DATE", "BOOLEAN"])),
            },
            _ => return Err(self.error(&["data type"])),
        };
        let optional = *self.peek() == Tok::Question;
        if optional {
            self.bump();
        }
        Ok(PropertyType { key, data_type, optional })
    }

    fn node_or_edge(&mut self, gt: &mut GraphType) -> Result<(), DdlError> {
        self.expect(Tok::LParen)?;
        let source = self.ident("label")?;
        self.expect(Tok::RParen)?;
        if *self.peek() != Tok::Dash {
            gt.node_types.push(NodeType { element: source });
            return Ok(());
        }
        self.bump();
        self.expect(Tok::LBracket)?;
        let element = self.ident("edge label")?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Arrow)?;
        let mut cardinality = None;
        if *self.peek() == Tok::Lt {
            self.bump();
            match self.bump() {
                Tok::Number(n) => cardinality = Some(n),
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&["number"]));
                }
            }
            self.expect(Tok::Gt)?;
        }
        self.expect(Tok::LParen)?;
        let target = self.ident("label")?;
        self.expect(Tok::RParen)?;
        gt.edge_types.push(EdgeType { source, element, target, cardinality });
        Ok(())
    }
}

/// Parses DDL text without semantic analysis.
pub fn parse_ddl_unchecked(text: &str) -> Result<GraphType, DdlError> {
    Parser { toks: lex(text)?, pos: 0 }.graph_type()
}
