//! `hiersmooth oracle-check`: compare the certificates with exhaustive
//! enumeration and print one line per identity.

use hiersmooth_core::oracle::{run_oracle_suite, Fault, OracleGrid, OracleOptions, OracleReport};

use crate::{CliError, OracleArgs};

pub fn format_report(report: &OracleReport) -> String {
    let mut out = format!("{:<50} {:>9} {:>9} {:>11}  status\n", "identity", "checked", "failures", "max_error");
    for r in &report.identities {
        out.push_str(&format!(
            "{:<50} {:>9} {:>9} {:>11.3e}  {}\n",
            r.name,
            r.checked,
            r.failures,
            r.max_error,
            if r.passed() { "PASS" } else { "FAIL" }
        ));
        if let Some(inst) = &r.first_failure {
            out.push_str(&format!("    first failure: {inst}\n"));
        }
    }
    out
}

pub fn run(a: &OracleArgs) -> Result<(), CliError> {
    if !(a.tolerance >= 0.0 && a.accounting_tolerance >= 0.0) {
        return Err(CliError::config("tolerances must be non-negative"));
    }
    if !(1..=3).contains(&a.max_rows) {
        return Err(CliError::config(format!("--max-rows must be 1, 2 or 3, got {}", a.max_rows)));
    }
    let grid = OracleGrid { rows: (1..=a.max_rows).collect(), gaussian_points: a.gaussian_points, ..Default::default() };
    let opts = OracleOptions {
        tolerance: a.tolerance,
        accounting_tolerance: a.accounting_tolerance,
        fault: a.inject_fault.map(Fault::ScalePerturbedMass),
    };
    let report = run_oracle_suite(&grid, &opts).map_err(CliError::from_config)?;
    print!("{}", format_report(&report));
    if report.passed() {
        println!("all identities hold");
        Ok(())
    } else {
        Err(CliError::failure("oracle check failed"))
    }
}
