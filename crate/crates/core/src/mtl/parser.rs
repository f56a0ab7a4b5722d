use thiserror::Error;

use super::ast::*;
use crate::lexer::{tokenize, Cursor, LexError, LexOptions, Tok};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl From<LexError> for SyntaxError {
    fn from(e: LexError) -> Self {
        SyntaxError { line: e.line, col: e.col, message: e.message }
    }
}

const MTL_LEX: LexOptions = LexOptions { hash_comments: false, dash_comments: true };

pub fn parse_transformation(text: &str) -> Result<Transformation, SyntaxError> {
    let mut cur = Cursor::new(tokenize(text, MTL_LEX)?);
    let name = if cur.eat_keyword("module") {
        let n = cur.expect_ident()?;
        cur.expect_punct(";")?;
        n
    } else {
        "transformation".to_string()
    };
    cur.expect_keyword("create")?;
    let target_alias = cur.expect_ident()?;
    cur.expect_punct(":")?;
    let target_mm = cur.expect_ident()?;
    cur.expect_keyword("from")?;
    let source_alias = cur.expect_ident()?;
    cur.expect_punct(":")?;
    let source_mm = cur.expect_ident()?;
    cur.expect_punct(";")?;

    let mut rules: Vec<Rule> = Vec::new();
    while !cur.at_eof() {
        let (line, col) = cur.here();
        let rule = parse_rule(&mut cur)?;
        if rules.iter().any(|r| r.name == rule.name) {
            return Err(SyntaxError { line, col, message: format!("duplicate rule `{}`", rule.name) });
        }
        rules.push(rule);
    }
    Ok(Transformation { name, target_alias, target_mm, source_alias, source_mm, rules })
}

/// Parses a standalone expression (used by the patch text format).
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let mut cur = Cursor::new(tokenize(text, MTL_LEX)?);
    let e = expr(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of expression").into());
    }
    Ok(e)
}

fn class_ref(cur: &mut Cursor) -> Result<ClassRef, LexError> {
    let mm = cur.expect_ident()?;
    cur.expect_punct("!")?;
    let class = cur.expect_ident()?;
    Ok(ClassRef { metamodel: mm, class })
}

fn parse_rule(cur: &mut Cursor) -> Result<Rule, SyntaxError> {
    cur.expect_keyword("rule")?;
    let name = cur.expect_ident()?;
    cur.expect_punct("{")?;
    cur.expect_keyword("from")?;
    let var = cur.expect_ident()?;
    cur.expect_punct(":")?;
    let ty = class_ref(cur)?;
    let guard = if cur.eat_punct("(") {
        let g = expr(cur)?;
        cur.expect_punct(")")?;
        Some(g)
    } else {
        None
    };
    let input = InputPattern { var, ty, guard };
    cur.expect_keyword("to")?;
    let mut outputs: Vec<OutputElement> = Vec::new();
    loop {
        let (line, col) = cur.here();
        let var = cur.expect_ident()?;
        if var == input.var || outputs.iter().any(|o| o.var == var) {
            return Err(SyntaxError { line, col, message: format!("duplicate pattern variable `{var}`") });
        }
        cur.expect_punct(":")?;
        let ty = class_ref(cur)?;
        let mut bindings: Vec<Binding> = Vec::new();
        if cur.eat_punct("(") {
            if !cur.eat_punct(")") {
                loop {
                    let (line, col) = cur.here();
                    let target = cur.expect_ident()?;
                    if bindings.iter().any(|b| b.target == target) {
                        return Err(SyntaxError { line, col, message: format!("duplicate binding `{target}`") });
                    }
                    cur.expect_punct("<-")?;
                    let e = expr(cur)?;
                    bindings.push(Binding { target, expr: e });
                    if cur.eat_punct(")") {
                        break;
                    }
                    cur.expect_punct(",")?;
                }
            }
        }
        outputs.push(OutputElement { var, ty, bindings });
        if !cur.eat_punct(",") {
            break;
        }
    }
    cur.expect_punct("}")?;
    Ok(Rule { name, input, outputs })
}

fn expr(cur: &mut Cursor) -> Result<Expr, LexError> {
    binary(cur, 1)
}

fn binop_here(cur: &Cursor) -> Option<BinaryOp> {
    match cur.peek() {
        Tok::Ident(s) if s == "or" => Some(BinaryOp::Or),
        Tok::Ident(s) if s == "and" => Some(BinaryOp::And),
        Tok::Punct("=") => Some(BinaryOp::Eq),
        Tok::Punct("<>") => Some(BinaryOp::Ne),
        Tok::Punct("+") => Some(BinaryOp::Add),
        _ => None,
    }
}

pub(crate) fn precedence(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => 1,
        BinaryOp::And => 2,
        BinaryOp::Eq | BinaryOp::Ne => 3,
        BinaryOp::Add => 4,
    }
}

fn binary(cur: &mut Cursor, min_prec: u8) -> Result<Expr, LexError> {
    let mut lhs = unary(cur)?;
    while let Some(op) = binop_here(cur) {
        let p = precedence(op);
        if p < min_prec {
            break;
        }
        cur.next();
        let rhs = binary(cur, p + 1)?;
        lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        if matches!(op, BinaryOp::Eq | BinaryOp::Ne) && matches!(binop_here(cur), Some(BinaryOp::Eq | BinaryOp::Ne)) {
            return Err(cur.error("comparison operators do not chain; add parentheses"));
        }
    }
    Ok(lhs)
}

fn unary(cur: &mut Cursor) -> Result<Expr, LexError> {
    if cur.eat_keyword("not") {
        return Ok(Expr::Not(Box::new(unary(cur)?)));
    }
    postfix(cur)
}

fn postfix(cur: &mut Cursor) -> Result<Expr, LexError> {
    let mut e = primary(cur)?;
    loop {
        if cur.eat_punct(".") {
            let name = cur.expect_ident()?;
            if cur.eat_punct("(") {
                if let Some(op) = TypeTestOp::from_name(&name) {
                    let ty = class_ref(cur)?;
                    cur.expect_punct(")")?;
                    e = Expr::TypeTest { receiver: Box::new(e), op, ty };
                } else if let Some(op) = PredefOp::from_name(&name) {
                    let args = call_args(cur)?;
                    e = Expr::Predef { receiver: Box::new(e), op, args };
                } else {
                    return Err(cur.error(format!("unknown operation `{name}`")));
                }
            } else {
                e = Expr::Nav { receiver: Box::new(e), feature: name };
            }
        } else if cur.eat_punct("->") {
            let name = cur.expect_ident()?;
            cur.expect_punct("(")?;
            if let Some(op) = IteratorOp::from_name(&name) {
                let var = cur.expect_ident()?;
                cur.expect_punct("|")?;
                let body = expr(cur)?;
                cur.expect_punct(")")?;
                e = Expr::Iterate { receiver: Box::new(e), op, var, body: Box::new(body) };
            } else if let Some(op) = CollOpName::from_name(&name) {
                let args = call_args(cur)?;
                e = Expr::CollOp { receiver: Box::new(e), op, args };
            } else {
                return Err(cur.error(format!("unknown collection operation `{name}`")));
            }
        } else {
            return Ok(e);
        }
    }
}

/// Arguments after an already-consumed `(`, including the closing `)`.
fn call_args(cur: &mut Cursor) -> Result<Vec<Expr>, LexError> {
    let mut args = Vec::new();
    if cur.eat_punct(")") {
        return Ok(args);
    }
    loop {
        args.push(expr(cur)?);
        if cur.eat_punct(")") {
            return Ok(args);
        }
        cur.expect_punct(",")?;
    }
}

fn primary(cur: &mut Cursor) -> Result<Expr, LexError> {
    match cur.peek().clone() {
        Tok::Str(s, _) => {
            cur.next();
            Ok(Expr::Lit(Literal::Str(s)))
        }
        Tok::Int(i) => {
            cur.next();
            Ok(Expr::Lit(Literal::Int(i)))
        }
        Tok::Punct("(") => {
            cur.next();
            let e = expr(cur)?;
            cur.expect_punct(")")?;
            Ok(e)
        }
        Tok::Ident(s) => {
            if let Some(kind) = CollectionKind::from_name(&s) {
                if matches!(cur.peek_at(1), Tok::Punct("{")) {
                    cur.next();
                    cur.next();
                    let mut items = Vec::new();
                    if !cur.eat_punct("}") {
                        loop {
                            items.push(expr(cur)?);
                            if cur.eat_punct("}") {
                                break;
                            }
                            cur.expect_punct(",")?;
                        }
                    }
                    return Ok(Expr::Collection { kind, items });
                }
            }
            if matches!(s.as_str(), "and" | "or" | "not" | "rule" | "from" | "to") {
                return Err(cur.unexpected("an expression"));
            }
            cur.next();
            Ok(match s.as_str() {
                "true" => Expr::Lit(Literal::Bool(true)),
                "false" => Expr::Lit(Literal::Bool(false)),
                _ => Expr::Var(s),
            })
        }
        _ => Err(cur.unexpected("an expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FAULTY;

    #[test]
    fn corpus_program_has_three_rules() {
        let t = parse_transformation(FAULTY).unwrap();
        let names: Vec<&str> = t.rules.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            ["Class2Table", "SingleValuedDataTypeAttribute2Column", "MultiValuedClassAttribute2Column"]
        );
        assert_eq!(t.source_mm, "Class");
        assert_eq!(t.target_mm, "Relational");
        assert_eq!(t.rules[2].outputs.len(), 3);
    }

    #[test]
    fn empty_transformation() {
        let t = parse_transformation("create OUT : R from IN : C;").unwrap();
        assert!(t.rules.is_empty());
        assert_eq!(t.name, "transformation");
    }

    #[test]
    fn missing_to_is_a_syntax_error() {
        let err = parse_transformation("create OUT : R from IN : C;\nrule A { from a : C!X }").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("to"), "{}", err.message);
    }

    #[test]
    fn duplicates_rejected() {
        let dup_rule = "create O : R from I : C; rule A { from a : C!X to b : R!Y } rule A { from a : C!X to b : R!Y }";
        assert!(parse_transformation(dup_rule).unwrap_err().message.contains("duplicate rule"));
        let dup_var = "create O : R from I : C; rule A { from a : C!X to a : R!Y }";
        assert!(parse_transformation(dup_var).is_err());
        let dup_binding = "create O : R from I : C; rule A { from a : C!X to b : R!Y (n <- a.n, n <- a.m) }";
        assert!(parse_transformation(dup_binding).unwrap_err().message.contains("duplicate binding"));
    }

    #[test]
    fn precedence_and_unary() {
        let e = parse_expr("not a.x and b or c = d + 'k'").unwrap();
        let Expr::Binary { op: BinaryOp::Or, lhs, rhs } = e else { panic!() };
        assert!(matches!(*lhs, Expr::Binary { op: BinaryOp::And, .. }));
        let Expr::Binary { op: BinaryOp::Eq, rhs: sum, .. } = *rhs else { panic!() };
        assert!(matches!(*sum, Expr::Binary { op: BinaryOp::Add, .. }));
        assert!(parse_expr("a = b = c").is_err());
        assert!(parse_expr("a.foo(1)").is_err());
    }
}
