//! `arra`: validate instances, answer authorization queries, apply edge
//! operations, translate RRA97/UARBAC instances and run the differential check.
//!
//! Exit status: 0 allow / success, 1 deny / disagreement, 2 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use arra_core::format::{load_path, save_path};
use arra_core::rule_engine::parse_set_builder;
use arra_core::translator::{diff_decisions, drop_first_set_element, map_rra97, map_uarbac, ReferenceModel};
use arra_core::{ArraInstance, Decision, Error, Instance};

#[derive(Parser)]
#[command(name = "arra", version, about = "Attribute-based role-role assignment policy engine")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Print full witness traces.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load and validate an instance file.
    Validate { file: PathBuf },
    /// Decide `op(au, r1, r2)`.
    Query {
        file: PathBuf,
        op: String,
        au: String,
        r1: String,
        r2: String,
    },
    /// Decide the set form `op(au, χ, r)` with χ given as `(select x pred)`.
    /// RRA97 and UARBAC files are translated first.
    QuerySet {
        file: PathBuf,
        op: String,
        au: String,
        builder: String,
        r: String,
    },
    /// Perform `op(au, r1, r2)` if authorized and write the new instance.
    Apply {
        file: PathBuf,
        op: String,
        au: String,
        r1: String,
        r2: String,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Translate an RRA97 or UARBAC instance into ARRA.
    Translate {
        file: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Translate and compare every decision against the source model.
    Diff {
        file: PathBuf,
        /// Drop one authority entry from the translation before comparing.
        #[arg(long)]
        drop_range: bool,
    },
}

/// A command's failure: either an engine error or a plain message.
enum Failure {
    Engine(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type Outcome = Result<ExitCode, Failure>;

struct Out {
    json: bool,
    trace: bool,
}

impl Out {
    fn decision(&self, d: &Decision) {
        if self.json {
            let mut v = json!({
                "decision": if d.allowed { "allow" } else { "deny" },
                "allowed": d.allowed,
            });
            if let Some(step) = d.trace.first() {
                v["disjunct"] = json!(step.disjunct);
            }
            if self.trace {
                v["trace"] = json!(d.trace);
            }
            println!("{v}");
        } else if self.trace {
            println!("{d}");
        } else {
            match d.trace.first() {
                Some(step) => println!("allow (disjunct {})", step.disjunct),
                None => println!("{}", if d.allowed { "allow" } else { "deny" }),
            }
        }
    }

    fn failure(&self, f: &Failure) {
        let (message, diagnostics) = match f {
            Failure::Engine(e) => (e.to_string(), e.diagnostics()),
            Failure::Usage(m) => (m.clone(), Vec::new()),
        };
        if self.json {
            println!("{}", json!({ "error": message, "diagnostics": diagnostics }));
        } else {
            eprintln!("error: {message}");
            if matches!(f, Failure::Engine(Error::Load(_))) {
                for d in diagnostics {
                    eprintln!("  {d}");
                }
            }
        }
    }
}

fn verdict(d: &Decision) -> ExitCode {
    ExitCode::from(if d.allowed { 0 } else { 1 })
}

fn translate(inst: &Instance) -> Result<ArraInstance, Failure> {
    match inst {
        Instance::Rra97(i) => Ok(map_rra97(i)?),
        Instance::Uarbac(i) => Ok(map_uarbac(i)?),
        Instance::Arra(_) => Err(Failure::Usage("the instance is already an ARRA instance".into())),
    }
}

fn validate(out: &Out, file: &Path) -> Outcome {
    let inst = load_path(file)?;
    let (roles, users) = match &inst {
        Instance::Arra(i) => (i.roles().nodes().len(), i.admin_users().len()),
        Instance::Rra97(i) => (i.roles().nodes().len(), i.users().len()),
        Instance::Uarbac(i) => (i.roles().nodes().len(), i.users().len()),
    };
    let model = inst.kind().as_str();
    if out.json {
        println!(
            "{}",
            json!({ "valid": true, "model": model, "roles": roles, "admin_users": users })
        );
    } else {
        println!("valid {model} instance: {roles} roles, {users} admin users");
    }
    Ok(ExitCode::SUCCESS)
}

fn query(out: &Out, file: &Path, op: &str, au: &str, r1: &str, r2: &str) -> Outcome {
    let d = load_path(file)?.decide(op, au, r1, r2)?;
    out.decision(&d);
    Ok(verdict(&d))
}

fn query_set(out: &Out, file: &Path, op: &str, au: &str, builder: &str, r: &str) -> Outcome {
    let inst = match load_path(file)? {
        Instance::Arra(i) => i,
        other => translate(&other)?,
    };
    let b = parse_set_builder(builder, inst.attributes())?;
    let d = inst.authorize_set(op, au, &b, r)?;
    out.decision(&d);
    Ok(verdict(&d))
}

fn apply(out: &Out, file: &Path, op: &str, au: &str, r1: &str, r2: &str, dest: &Path) -> Outcome {
    let (d, next) = load_path(file)?.apply(op, au, r1, r2)?;
    out.decision(&d);
    match next {
        Some(next) => {
            save_path(&next, dest)?;
            if !out.json {
                println!("wrote {}", dest.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        None => Ok(ExitCode::from(1)),
    }
}

fn translate_cmd(out: &Out, file: &Path, dest: &Path) -> Outcome {
    let arra = translate(&load_path(file)?)?;
    save_path(&Instance::Arra(arra), dest)?;
    if out.json {
        println!("{}", json!({ "written": dest.display().to_string() }));
    } else {
        println!("wrote {}", dest.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn diff(out: &Out, file: &Path, drop_range: bool) -> Outcome {
    let src = load_path(file)?;
    let mut arra = translate(&src)?;
    if drop_range {
        arra = drop_first_set_element(&arra)?;
    }
    let reference: &dyn ReferenceModel = match &src {
        Instance::Rra97(i) => i,
        Instance::Uarbac(i) => i,
        Instance::Arra(_) => unreachable!("rejected by translate"),
    };
    let report = diff_decisions(reference, &arra)?;
    if out.json {
        let mut v = json!({
            "decisions": report.decisions,
            "disagreements": report.disagreements.len(),
        });
        if out.trace || !report.is_clean() {
            v["details"] = json!(report.disagreements);
        }
        println!("{v}");
    } else {
        println!("{report}");
        if out.trace {
            for d in &report.disagreements {
                println!("{} {} {} {}", d.op, d.user, d.r1, d.r2);
                println!("  reference: {}", d.reference.to_string().replace('\n', "\n  "));
                println!("  arra: {}", d.arra.to_string().replace('\n', "\n  "));
            }
        }
    }
    Ok(ExitCode::from(if report.is_clean() { 0 } else { 1 }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Out {
        json: cli.json,
        trace: cli.trace,
    };
    let result = match &cli.cmd {
        Cmd::Validate { file } => validate(&out, file),
        Cmd::Query { file, op, au, r1, r2 } => query(&out, file, op, au, r1, r2),
        Cmd::QuerySet {
            file,
            op,
            au,
            builder,
            r,
        } => query_set(&out, file, op, au, builder, r),
        Cmd::Apply {
            file,
            op,
            au,
            r1,
            r2,
            out: dest,
        } => apply(&out, file, op, au, r1, r2, dest),
        Cmd::Translate { file, out: dest } => translate_cmd(&out, file, dest),
        Cmd::Diff { file, drop_range } => diff(&out, file, *drop_range),
    };
    result.unwrap_or_else(|f| {
        out.failure(&f);
        ExitCode::from(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["arra", "query", "f.json", "op", "a", "b", "c", "--json", "--trace"]).unwrap();
        assert!(cli.json && cli.trace);
    }

    #[test]
    fn translate_rejects_arra() {
        let Instance::Arra(i) = arra_core::fixtures::dept_example().unwrap() else {
            unreachable!()
        };
        assert!(matches!(translate(&Instance::Arra(i)), Err(Failure::Usage(_))));
    }
}
