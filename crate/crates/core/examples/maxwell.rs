//! Maxwell's equations from the electromagnetic Lagrangian, run as a
//! script: field strength from the potential, the Bianchi identity, the
//! field equation and current conservation.
//!
//! ```bash
//! cargo run --example maxwell
//! ```

use indicial::render::{render_latex, Format};
use indicial::session::{run_script, Session};

const SCRIPT: &str = include_str!("../scripts/maxwell.mac");

fn main() {
    let mut session = Session::new();
    let outcome = run_script(&mut session, SCRIPT, Format::Plain);
    for line in &outcome.transcript {
        println!("{line}");
    }
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }

    // Every labelled result stays available after the run.
    if let Some(eq) = session.labelled("%t14") {
        println!("\nfield equation, LaTeX: {}", render_latex(eq));
    }
    std::process::exit(outcome.status);
}
