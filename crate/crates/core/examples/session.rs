//! A session driven programmatically: numbered outputs, `ishow` labels,
//! `%th` history references, variables and error recovery.
//!
//! The same statements can be typed into `indicial --repl`.

use indicial::render::Format;
use indicial::session::Session;

const INPUT: &[&str] = &[
    "imetric(g)$",
    "x([a],[])*g([],[a,b]);",
    "ishow(contract(%))$",
    "V:ishow(canform(%th(2) - 2*x([],[b])))$",
    "V;",
    "x([a],[])*y([a],[]);",
    "contract(kdelta([a],[a]));",
];

fn main() {
    let mut session = Session::new();
    for src in INPUT {
        println!("(%i{}) {src}", session.next_number());
        match session.run_str(src) {
            Ok(lines) => lines.iter().for_each(|l| println!("{}", l.render(Format::Plain))),
            Err(e) => println!("error: {e}"),
        }
    }
    println!("\nhistory: {}", session.history_labels().join(" "));
    println!("V = {}", session.variable("V").expect("assigned"));
}
