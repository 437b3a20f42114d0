//! Source printer. `parse(print(p)) == p` for every parsed program.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for i in &p.imports {
        let _ = writeln!(out, "import {};", i.name);
    }
    for (k, c) in p.classes.iter().enumerate() {
        if k > 0 || !p.imports.is_empty() {
            out.push('\n');
        }
        print_class(&mut out, c);
    }
    out
}

pub fn print_type(t: &TypeAnn) -> String {
    match t {
        TypeAnn::Void { .. } => "void".into(),
        TypeAnn::Named { name, args, .. } => {
            if args.is_empty() {
                name.clone()
            } else {
                let inner: Vec<String> = args.iter().map(print_type).collect();
                format!("{}<{}>", name, inner.join(", "))
            }
        }
    }
}

pub fn print_generics(gs: &[GenericParam]) -> String {
    if gs.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = gs
        .iter()
        .map(|g| {
            if g.bounds.is_empty() {
                g.name.clone()
            } else {
                let b: Vec<String> = g.bounds.iter().map(print_type).collect();
                format!("{} extends {}", g.name, b.join(" & "))
            }
        })
        .collect();
    format!("<{}>", parts.join(", "))
}

fn print_class(out: &mut String, c: &ClassDecl) {
    let _ = writeln!(out, "class {}{} {{", c.name, print_generics(&c.generics));
    for (k, m) in c.order.iter().enumerate() {
        match *m {
            Member::Field(i) => {
                let f = &c.fields[i];
                out.push_str(INDENT);
                if let TypeSlot::Annotated(t) = &f.ty {
                    out.push_str(&print_type(t));
                    out.push(' ');
                }
                out.push_str(&f.name);
                if let Some(e) = &f.init {
                    out.push_str(" = ");
                    out.push_str(&print_expr(e, 0));
                }
                out.push_str(";\n");
            }
            Member::Method(i) => {
                if k > 0 {
                    out.push('\n');
                }
                print_method(out, &c.methods[i]);
            }
        }
    }
    out.push_str("}\n");
}

pub fn method_header(m: &MethodDecl) -> String {
    let mut h = String::new();
    if !m.generics.is_empty() {
        h.push_str(&print_generics(&m.generics));
        h.push(' ');
    }
    if let TypeSlot::Annotated(t) = &m.ret {
        h.push_str(&print_type(t));
        h.push(' ');
    }
    h.push_str(&m.name);
    h.push('(');
    h.push_str(&print_params(&m.params));
    h.push(')');
    h
}

fn print_params(ps: &[Param]) -> String {
    let parts: Vec<String> = ps
        .iter()
        .map(|p| match &p.ty {
            TypeSlot::Annotated(t) => format!("{} {}", print_type(t), p.name),
            TypeSlot::Infer => p.name.clone(),
        })
        .collect();
    parts.join(", ")
}

fn print_method(out: &mut String, m: &MethodDecl) {
    for d in &m.doc {
        let _ = writeln!(out, "{INDENT}// {d}");
    }
    let _ = writeln!(out, "{INDENT}{} {{", method_header(m));
    print_stmts(out, &m.body, 2);
    let _ = writeln!(out, "{INDENT}}}");
}

fn print_stmts(out: &mut String, stmts: &[Stmt], level: usize) {
    for s in stmts {
        print_stmt(out, s, level);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    let pad = INDENT.repeat(level);
    match s {
        Stmt::Local { name, ty, init, .. } => {
            out.push_str(&pad);
            match ty {
                TypeSlot::Annotated(t) => out.push_str(&print_type(t)),
                TypeSlot::Infer => out.push_str("var"),
            }
            let _ = write!(out, " {name}");
            if let Some(e) = init {
                let _ = write!(out, " = {}", print_expr(e, 0));
            }
            out.push_str(";\n");
        }
        Stmt::While { cond, body, .. } => {
            let _ = writeln!(out, "{pad}while ({}) {{", print_expr(cond, 0));
            print_stmts(out, body, level + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::Return { value, .. } => match value {
            Some(e) => {
                let _ = writeln!(out, "{pad}return {};", print_expr(e, 0));
            }
            None => {
                let _ = writeln!(out, "{pad}return;");
            }
        },
        Stmt::Block(b) => {
            let _ = writeln!(out, "{pad}{{");
            print_stmts(out, b, level + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::Expr(e) => {
            let _ = writeln!(out, "{pad}{};", print_expr(e, 0));
        }
    }
}

/// Precedence levels: 0 = assignment/lambda, 1..=4 binary, 5 postfix/primary.
fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Assign { .. } | ExprKind::Lambda { .. } => 0,
        ExprKind::Binary { op, .. } => op.precedence(),
        _ => 5,
    }
}

/// Print `e` in a context that needs precedence at least `min`.
pub fn print_expr(e: &Expr, min: u8) -> String {
    let s = print_expr_raw(e);
    if expr_prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn print_expr_raw(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Lit(Literal::Int(v)) => v.to_string(),
        ExprKind::Lit(Literal::Bool(b)) => b.to_string(),
        ExprKind::Lit(Literal::Str(s)) => {
            let escaped = s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n").replace('\t', "\\t");
            format!("\"{escaped}\"")
        }
        ExprKind::Var(v) => v.clone(),
        ExprKind::This => "this".into(),
        ExprKind::Assign { target, value } => {
            format!("{} = {}", print_expr(target, 5), print_expr(value, 0))
        }
        ExprKind::PostInc(t) => format!("{}++", print_expr(t, 5)),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            // left-associative, `<=` non-associative
            let lmin = if *op == BinOp::Le { p + 1 } else { p };
            format!("{} {} {}", print_expr(lhs, lmin), op.symbol(), print_expr(rhs, p + 1))
        }
        ExprKind::Call { receiver, name, args } => {
            let a: Vec<String> = args.iter().map(|x| print_expr(x, 0)).collect();
            match receiver {
                Some(r) => format!("{}.{}({})", print_expr(r, 5), name, a.join(", ")),
                None => format!("{}({})", name, a.join(", ")),
            }
        }
        ExprKind::Field { receiver, name } => format!("{}.{}", print_expr(receiver, 5), name),
        ExprKind::New { class, type_args, args } => {
            let a: Vec<String> = args.iter().map(|x| print_expr(x, 0)).collect();
            let targs = match type_args {
                None => String::new(),
                Some(ts) => format!("<{}>", ts.iter().map(print_type).collect::<Vec<_>>().join(", ")),
            };
            format!("new {}{}({})", class, targs, a.join(", "))
        }
        ExprKind::Lambda { params, body } => {
            let head = if params.len() == 1 && params[0].ty.is_infer() {
                params[0].name.clone()
            } else {
                format!("({})", print_params(params))
            };
            match body {
                LambdaBody::Expr(b) => format!("{} -> {}", head, print_expr(b, 0)),
                LambdaBody::Block(stmts) => {
                    let mut inner = String::new();
                    for s in stmts {
                        print_stmt(&mut inner, s, 0);
                    }
                    let inner: Vec<&str> = inner.lines().collect();
                    format!("{} -> {{ {} }}", head, inner.join(" "))
                }
            }
        }
    }
}
