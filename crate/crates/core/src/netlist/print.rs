use std::fmt::Write;

use super::ast::CircuitAst;

/// Renders the canonical text form of a netlist.
///
/// Header, then one `input` and one `output` line, then node and gate
/// declarations in declaration order, then `connect` lines sorted
/// lexicographically. Comments and spacing are not preserved.
pub fn print_canonical(ast: &CircuitAst) -> String {
    let mut out = String::new();
    writeln!(out, "circuit {}", ast.name).unwrap();
    if !ast.inputs.is_empty() {
        writeln!(out, "input {}", ast.inputs.join(", ")).unwrap();
    }
    if !ast.outputs.is_empty() {
        writeln!(out, "output {}", ast.outputs.join(", ")).unwrap();
    }
    for n in &ast.nodes {
        let keyword = match n.kind {
            super::ast::DeclKind::Prim(_) => "node",
            super::ast::DeclKind::Gate(_) => "gate",
        };
        writeln!(out, "{keyword} {} : {}", n.name, n.kind).unwrap();
    }
    let mut lines: Vec<String> = ast.connects.iter().map(|c| c.to_string()).collect();
    lines.sort();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
