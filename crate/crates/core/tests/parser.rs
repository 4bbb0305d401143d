//! Script grammar, statement classification, and printer round trips.

mod common;

use indicial::error::Error;
use indicial::expr::Expression;
use indicial::parser::{parse_display, parse_expression, parse_script, parse_statement, StatementKind};
use indicial::render::{render, render_latex, Format};

const GOLDEN: &str = include_str!("../scripts/maxwell.mac");

#[test]
fn golden_script_parses_into_fifteen_statements() {
    let stmts = parse_script(GOLDEN).unwrap();
    assert_eq!(stmts.len(), 15);
    let echoed: Vec<usize> = stmts
        .iter()
        .enumerate()
        .filter(|(_, s)| s.echo)
        .map(|(i, _)| i + 1)
        .collect();
    assert_eq!(echoed, [5], "only the extdiff check ends with `;`");
    // The Lagrangian spans two source lines and is reported at its first.
    assert!(matches!(&stmts[5].kind, StatementKind::Assignment(name, _) if name == "L"));
    assert_eq!(stmts[5].line, 7);
}

#[test]
fn golden_statements_classify() {
    let stmts = parse_script(GOLDEN).unwrap();
    let commands: Vec<&str> = stmts
        .iter()
        .filter_map(|s| match &s.kind {
            StatementKind::Command(name, _) => Some(name.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(
        commands,
        [
            "load",
            "imetric",
            "igeowedge_flag",
            "components",
            "extdiff",
            "remcomps",
            "decsym",
            "matchdeclare",
            "defrule",
            "defrule",
            "ishow",
            "ishow",
            "ishow",
            "ishow"
        ]
    );
}

#[test]
fn each_golden_line_parses_on_its_own() {
    let body: String = GOLDEN
        .lines()
        .filter(|l| !l.starts_with("/*"))
        .collect::<Vec<_>>()
        .join("\n");
    for chunk in body.split_inclusive(['$', ';']) {
        if chunk.trim().is_empty() {
            continue;
        }
        parse_statement(chunk).unwrap_or_else(|e| panic!("`{}`: {e}", chunk.trim()));
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let stmts = parse_script("/* one */\n\n x([a],[]) ; /* two */ y$").unwrap();
    assert_eq!(stmts.len(), 2);
    assert_eq!(stmts[1].line, 3);
}

#[test]
fn quit_statement() {
    assert_eq!(parse_statement("quit;").unwrap().kind, StatementKind::Quit);
}

#[test]
fn missing_terminator_is_a_syntax_error() {
    assert!(matches!(parse_script("x([a],[])"), Err(Error::Syntax { .. })));
}

#[test]
fn unbalanced_brackets_report_a_position() {
    match parse_script("imetric(g)$\nx([a],[]$") {
        Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_function_is_rejected_at_parse_time() {
    assert!(matches!(parse_script("frobnicate(x)$"), Err(Error::UnknownCommand(n)) if n == "frobnicate"));
}

#[test]
fn unknown_name_with_index_lists_is_a_tensor() {
    let e = parse_expression("frobnicate([a],[b])").unwrap();
    assert_eq!(e.to_string(), "frobnicate_{a}^{b}");
}

#[test]
fn triple_index_in_user_product() {
    assert!(matches!(
        parse_expression("x([a],[])*y([],[a])*z([a],[])"),
        Err(Error::TripleIndex(i)) if i == "a"
    ));
}

#[test]
fn same_variance_repeat_is_a_clash() {
    assert!(matches!(
        parse_expression("x([a],[])*y([a],[])"),
        Err(Error::VarianceClash(_))
    ));
}

#[test]
fn mixed_free_indices_in_a_sum() {
    assert!(matches!(
        parse_expression("x([a],[]) + y([b],[])"),
        Err(Error::MixedFreeIndices { .. })
    ));
}

#[test]
fn numbers_and_fractions_are_kept_as_written() {
    let e = parse_expression("-3/4*x([a],[]) + 2/8*x([a],[])").unwrap();
    assert_eq!(e.to_string(), "-3/4 x_{a} + 1/4 x_{a}");
}

#[test]
fn squares_rename_their_dummies() {
    let e = parse_expression("(x([a],[])*y([],[a]))^2").unwrap();
    e.validate().unwrap();
    assert_eq!(e.terms[0].dummies().len(), 2);
}

#[test]
fn covariant_derivative_syntax_forms() {
    let inert = parse_expression("'covdiff(v([],[a]),b)").unwrap();
    assert_eq!(inert.to_string(), "v^{a}_{;b}");
    let display = parse_display("v^{a}_{;b}").unwrap();
    assert_eq!(inert, display);
}

#[test]
fn display_notation_reads_mixed_derivative_runs() {
    let e = parse_display("A_{m,k;n}").unwrap();
    assert_eq!(e.to_string(), "A_{m,k;n}");
    let w = parse_display("-1/4 (g^{a b} phi_{,b})_{;a}").unwrap();
    assert_eq!(w.to_string(), "-1/4 (g^{a b} phi_{,b})_{;a}");
}

// ------------------------------------------------------------ round trips

fn round_trip(e: &Expression) {
    let plain = render(e, Format::Plain);
    assert_eq!(&parse_display(&plain).unwrap(), e, "plain `{plain}`");
    let script = render(e, Format::Script);
    assert_eq!(&parse_expression(&script).unwrap(), e, "script `{script}`");
    let json = render(e, Format::Json);
    assert_eq!(&serde_json::from_str::<Expression>(&json).unwrap(), e, "json `{json}`");
}

#[test]
fn random_expressions_round_trip_through_every_readable_format() {
    let mut rng = common::rng("parser-round-trip");
    for _ in 0..300 {
        round_trip(&common::random_expression(&mut rng, common::TEMPLATES));
    }
}

#[test]
fn golden_results_round_trip() {
    let mut s = indicial::session::Session::new();
    s.run_str(GOLDEN).unwrap();
    for label in s.history_labels() {
        round_trip(s.labelled(&label).unwrap());
    }
}

#[test]
fn latex_uses_greek_and_derivative_markers() {
    let e = parse_display("-1/4 F_{m n;k} mu^{m}").unwrap();
    assert_eq!(render_latex(&e), r"-\frac{1}{4} F_{m n;k}\, \mu^{m}");
}
