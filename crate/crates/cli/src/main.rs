mod args;
mod config;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use rsm_core::sweep::{SweepKind, SweepSpec};
use rsm_core::{Result, ResultTable};

use args::{Cli, Cmd};

fn spec_for(cmd: &Cmd) -> Result<Option<SweepSpec>> {
    Ok(Some(match cmd {
        Cmd::Observables(c) => c.spec(SweepKind::Observables)?,
        Cmd::Qfi(c) => c.spec(SweepKind::Qfi)?,
        Cmd::Qfi3d(c) => c.spec(SweepKind::Qfi3d)?,
        Cmd::Polaron(c) => c.spec(SweepKind::PolaronDecomposition)?,
        Cmd::Wavefunction(w) => w.spec(SweepKind::Wavefunction)?,
        Cmd::Wigner(w) => w.spec()?,
        Cmd::Ptps(p) => p.spec()?,
        Cmd::Exponent(e) => e.spec()?,
        Cmd::PhaseDiagram(c) => c.spec(SweepKind::PhaseDiagram)?,
        Cmd::Selftest => return Ok(None),
    }))
}

fn print_table(t: &ResultTable) {
    println!("{}", t.header.join("\t"));
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        println!("{}", cells.join("\t"));
    }
}

fn flagged(t: &ResultTable) -> usize {
    t.column("flag")
        .map(|f| f.iter().filter(|&&v| v != 0.0).count())
        .unwrap_or(0)
}

fn run(spec: &SweepSpec) -> Result<()> {
    let out = rsm_core::run_sweep(spec)?;
    let path = spec.resolved_output();
    for p in out.write(&path)? {
        println!("wrote {}", p.display());
    }
    if let Some(s) = &out.summary {
        if spec.kind != SweepKind::Wigner {
            print_table(s);
        }
    }
    let n = flagged(&out.main) + out.summary.as_ref().map_or(0, flagged);
    if n > 0 {
        eprintln!("warning: {n} row(s) carry a nonzero flag (see the flags legend in the file header)");
    }
    Ok(())
}

fn selftest() -> ExitCode {
    let mut ok = true;
    for c in rsm_core::selftest::run() {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let argv = match config::splice(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cmd = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true));
    let cli = match cmd.try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = spec_for(&cli.cmd).and_then(|spec| match spec {
        Some(s) => run(&s).map(|_| None),
        None => Ok(Some(selftest())),
    });
    match result {
        Ok(Some(code)) => code,
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
