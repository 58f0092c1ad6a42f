use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ArithOp, Statement, Term};
use crate::error::{Error, Result};
use crate::features::Feature;

#[derive(Debug)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn render(&self) -> String {
        match self {
            Sexp::Atom(a, _) => a.clone(),
            Sexp::List(items, _) => {
                let inner: Vec<String> = items.iter().map(Sexp::render).collect();
                format!("({})", inner.join(" "))
            }
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax { position, message: message.into() }
}

fn read(text: &str) -> Result<Sexp> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if done.is_some() {
            return Err(syntax(pos, "trailing input after statement"));
        }
        let item = match c {
            '(' => {
                chars.next();
                stack.push((Vec::new(), pos));
                continue;
            }
            ')' => {
                chars.next();
                let (items, start) = stack.pop().ok_or_else(|| syntax(pos, "unbalanced ')'"))?;
                Sexp::List(items, start)
            }
            _ => {
                let mut tok = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                }
                Sexp::Atom(tok, pos)
            }
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => done = Some(item),
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed '('"));
    }
    done.ok_or_else(|| syntax(text.len(), "empty input"))
}

enum Head {
    Arith(ArithOp),
    Eq,
    And,
    Implies,
    Not,
}

fn head(s: &Sexp) -> Result<Head> {
    let Sexp::Atom(a, pos) = s else {
        return Err(syntax(s.pos(), "operator expected"));
    };
    Ok(match a.as_str() {
        "+" => Head::Arith(ArithOp::Add),
        "-" | "−" => Head::Arith(ArithOp::Sub),
        "*" | "×" => Head::Arith(ArithOp::Mul),
        "=" => Head::Eq,
        "and" | "∧" => Head::And,
        "=>" | "->" | "⟹" => Head::Implies,
        "not" | "¬" => Head::Not,
        _ => return Err(syntax(*pos, format!("unknown operator `{a}`"))),
    })
}

fn arity(items: &[Sexp], want: usize, pos: usize) -> Result<()> {
    if items.len() != want + 1 {
        return Err(syntax(
            pos,
            format!("`{}` takes {want} operand(s), got {}", items[0].render(), items.len() - 1),
        ));
    }
    Ok(())
}

fn term(s: &Sexp) -> Result<Term> {
    match s {
        Sexp::Atom(a, pos) => {
            if let Some(f) = Feature::from_name(a) {
                return Ok(Term::Var(f));
            }
            let digits = a.strip_prefix('-').unwrap_or(a);
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return a
                    .parse()
                    .map(Term::Const)
                    .map_err(|_| syntax(*pos, format!("integer `{a}` out of range")));
            }
            if matches!(a.as_str(), "+" | "-" | "*" | "=" | "and" | "=>" | "not") {
                return Err(syntax(*pos, format!("operator `{a}` outside parentheses")));
            }
            Err(syntax(*pos, format!("unknown feature `{a}`")))
        }
        Sexp::List(items, pos) => {
            let first = items.first().ok_or_else(|| syntax(*pos, "empty list"))?;
            match head(first)? {
                Head::Arith(op) => {
                    arity(items, 2, *pos)?;
                    Ok(Term::bin(op, term(&items[1])?, term(&items[2])?))
                }
                _ => Err(Error::Type {
                    node: s.render(),
                    message: "Boolean node where an arithmetic term is required".to_string(),
                }),
            }
        }
    }
}

fn statement(s: &Sexp) -> Result<Statement> {
    let Sexp::List(items, pos) = s else {
        return Err(Error::Type {
            node: s.render(),
            message: "arithmetic leaf where a Boolean statement is required".to_string(),
        });
    };
    let first = items.first().ok_or_else(|| syntax(*pos, "empty list"))?;
    match head(first)? {
        Head::Eq => {
            arity(items, 2, *pos)?;
            Ok(Statement::eq(term(&items[1])?, term(&items[2])?))
        }
        Head::And => {
            arity(items, 2, *pos)?;
            Ok(Statement::and(statement(&items[1])?, statement(&items[2])?))
        }
        Head::Implies => {
            arity(items, 2, *pos)?;
            Ok(Statement::implies(statement(&items[1])?, statement(&items[2])?))
        }
        Head::Not => {
            arity(items, 1, *pos)?;
            Ok(Statement::not(statement(&items[1])?))
        }
        // an ill-typed child is the more precise complaint
        Head::Arith(_) => term(s).and_then(|_| Err(Error::Type {
            node: s.render(),
            message: "arithmetic node where a Boolean statement is required".to_string(),
        })),
    }
}

/// Parses the prefix grammar documented on the module.
pub fn parse(text: &str) -> Result<Statement> {
    statement(&read(text)?)
}
