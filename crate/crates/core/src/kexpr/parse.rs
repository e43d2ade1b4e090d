//! Parser for the textual grammar
//! `expr := INT '(' NAME ')' | 'u(' expr (',' expr)+ ')' | 'r(' INT '->' INT ',' expr ')' | 'e(' INT ',' INT ',' expr ')'`.
//!
//! Lines starting with `#` or `%` are comments. The parser keeps its own
//! stack, so nesting depth is bounded only by memory.

use super::{Color, KExpr, KExprError, KNode};

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let at_line_start = self.pos == 0 || self.src[self.pos - 1] == b'\n';
            if at_line_start && matches!(self.src.get(self.pos), Some(b'#' | b'%')) {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, KExprError> {
        Err(KExprError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn expect(&mut self, s: &str) -> Result<(), KExprError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn color(&mut self) -> Result<Color, KExprError> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let v: i64 = match text.parse() {
            Ok(v) => v,
            Err(_) => return self.err("expected a color"),
        };
        if v < 1 || v > Color::MAX as i64 {
            return Err(KExprError::BadColor(v));
        }
        Ok(v as Color)
    }

    fn name(&mut self) -> Result<String, KExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an argument name");
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }
}

enum Frame {
    Union(Vec<usize>),
    Relabel(Color, Color),
    Edge(Color, Color),
}

/// Parse a k-expression; node ids are assigned in level order, root = 0.
pub fn parse_kexpr(text: &str) -> Result<KExpr, KExprError> {
    let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
    let mut arena: Vec<KNode> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    'start: loop {
        // Parse the head of an expression.
        let mut done = match lx.peek() {
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                let color = lx.color()?;
                lx.expect("(")?;
                let name = lx.name()?;
                lx.expect(")")?;
                arena.push(KNode::Initial { color, name });
                arena.len() - 1
            }
            Some(b'u') => {
                lx.pos += 1;
                lx.expect("(")?;
                stack.push(Frame::Union(Vec::new()));
                continue 'start;
            }
            Some(b'r') => {
                lx.pos += 1;
                lx.expect("(")?;
                let from = lx.color()?;
                lx.expect("->")?;
                let to = lx.color()?;
                lx.expect(",")?;
                stack.push(Frame::Relabel(from, to));
                continue 'start;
            }
            Some(b'e') => {
                lx.pos += 1;
                lx.expect("(")?;
                let src = lx.color()?;
                lx.expect(",")?;
                let dst = lx.color()?;
                lx.expect(",")?;
                if src == dst {
                    return Err(KExprError::SelfColorEdge(src));
                }
                stack.push(Frame::Edge(src, dst));
                continue 'start;
            }
            Some(_) => return lx.err("expected an expression"),
            None => return lx.err("unexpected end of input"),
        };
        // Close frames with the finished subexpression `done`.
        loop {
            match stack.pop() {
                None => {
                    if lx.peek().is_some() {
                        return lx.err("trailing input");
                    }
                    return KExpr::from_arena(arena, done);
                }
                Some(Frame::Union(mut ch)) => {
                    ch.push(done);
                    match lx.peek() {
                        Some(b',') => {
                            lx.pos += 1;
                            stack.push(Frame::Union(ch));
                            continue 'start;
                        }
                        Some(b')') => {
                            lx.pos += 1;
                            if ch.len() < 2 {
                                return Err(KExprError::ThinUnion);
                            }
                            arena.push(KNode::Union(ch));
                        }
                        _ => return lx.err("expected `,` or `)` in union"),
                    }
                }
                Some(Frame::Relabel(from, to)) => {
                    lx.expect(")")?;
                    arena.push(KNode::Relabel { from, to, child: done });
                }
                Some(Frame::Edge(src, dst)) => {
                    lx.expect(")")?;
                    arena.push(KNode::EdgeIntro { src, dst, child: done });
                }
            }
            done = arena.len() - 1;
        }
    }
}
