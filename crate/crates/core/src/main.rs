// Copyright 2026 The AWAIRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::io::{self, BufRead, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use awaire::engine::{tune_from_cvrs, AuditConfig, WeightScheme};
use awaire::service::{CreateRequest, SessionStore, StatusBody};
use awaire::simulate::{runner_up, Simulator};
use awaire::{
    generate_pathological, parse_ballot_file, permute_labels, tabulate, AuditSetup, Ballot,
    BallotFormat, CandidateId, Contest, Error, TieBreak,
};

#[derive(Parser)]
#[command(
    name = "awaire",
    version,
    about = "Ballot-polling risk-limiting audits for IRV contests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a ballot file and print each elimination round.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "ranks")]
        format: BallotFormat,
    },
    /// List every requirement in the audit pool with its true assorter mean.
    Explain {
        file: PathBuf,
        #[arg(long, default_value = "ranks")]
        format: BallotFormat,
        /// Defaults to the tabulated winner.
        #[arg(long)]
        reported_winner: Option<String>,
        #[arg(long, default_value_t = 6)]
        max_candidates: usize,
    },
    /// Replay audits over random sampling orders.
    Simulate(SimulateArgs),
    /// Write the pathological contest with margin parameter `m`.
    Generate {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value = "aggregated")]
        format: BallotFormat,
    },
    /// Serve live audit sessions over HTTP on the loopback interface.
    Serve {
        #[arg(long, default_value_t = 8350)]
        port: u16,
        #[arg(long, default_value = "awaire-data")]
        data: PathBuf,
    },
    /// Run a live audit session from the terminal.
    Audit {
        #[arg(long, default_value = "awaire-data")]
        data: PathBuf,
        /// JSON session manifest (ballot_count, candidates, reported_winner, config, cvrs).
        #[arg(long, conflicts_with = "resume", required_unless_present = "resume")]
        manifest: Option<PathBuf>,
        /// Continue an existing session.
        #[arg(long)]
        resume: Option<String>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "pathological")]
    ballots: Option<PathBuf>,
    /// Use the pathological contest with this margin parameter instead of a file.
    #[arg(long, conflicts_with = "ballots")]
    pathological: Option<f64>,
    #[arg(long, default_value = "ranks")]
    format: BallotFormat,
    /// Defaults to the tabulated winner.
    #[arg(long, conflicts_with = "runner_up")]
    reported_winner: Option<String>,
    /// Report the candidate eliminated just before the winner.
    #[arg(long)]
    runner_up: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "largest")]
    scheme: WeightScheme,
    #[arg(long, default_value_t = 50)]
    d: u32,
    #[arg(long, default_value_t = 0.52)]
    eta0: f64,
    #[arg(long, default_value_t = 0.5)]
    mu0: f64,
    #[arg(long, default_value_t = 25)]
    update_every: u32,
    #[arg(long, default_value_t = 6)]
    max_candidates: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Cast vote records used to tune starting weights and eta0.
    #[arg(long, conflicts_with = "oracle_cvrs")]
    cvrs: Option<PathBuf>,
    /// Tune from error-free records, i.e. the ballots themselves.
    #[arg(long)]
    oracle_cvrs: bool,
    /// Keep the starting weights for the whole audit.
    #[arg(long)]
    fixed_weights: bool,
    /// Relabel the records: candidate id `c` becomes `perm[c]`.
    #[arg(long, value_delimiter = ',')]
    permute_labels: Option<Vec<CandidateId>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> awaire::Result<()> {
    match command {
        Command::Check { file, format } => check(&load(&file, format)?),
        Command::Explain {
            file,
            format,
            reported_winner,
            max_candidates,
        } => {
            let contest = load(&file, format)?;
            let winner = match reported_winner {
                Some(name) => find(&contest, &name)?,
                None => contest.reported_winner(),
            };
            explain(&contest, winner, max_candidates)
        }
        Command::Simulate(args) => simulate(args),
        Command::Generate { m, format } => {
            print!(
                "{}",
                awaire::write_ballot_file(&generate_pathological(m)?, format)
            );
            Ok(())
        }
        Command::Serve { port, data } => {
            let store = Arc::new(SessionStore::open(data)?);
            let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
            tokio::runtime::Runtime::new()?.block_on(awaire::service::http::serve(store, addr))?;
            Ok(())
        }
        Command::Audit {
            data,
            manifest,
            resume,
        } => audit(&data, manifest, resume),
    }
}

fn load(path: &Path, format: BallotFormat) -> awaire::Result<Contest> {
    parse_ballot_file(&fs::read(path)?, format)
}

fn find(contest: &Contest, name: &str) -> awaire::Result<CandidateId> {
    contest
        .find(name)
        .ok_or_else(|| Error::UnknownCandidate(name.to_owned()))
}

fn join_names(contest: &Contest, ids: impl IntoIterator<Item = CandidateId>, sep: &str) -> String {
    ids.into_iter()
        .map(|c| contest.name(c))
        .collect::<Vec<_>>()
        .join(sep)
}

fn check(contest: &Contest) -> awaire::Result<()> {
    let result = tabulate(contest, &TieBreak::default());
    let order = result.order.as_slice();
    println!(
        "order: {}",
        join_names(contest, order.iter().copied(), " > ")
    );
    println!("winner: {}", contest.name(result.winner()));
    for (k, round) in result.rounds.iter().enumerate() {
        let tallies: Vec<String> = round
            .standing
            .iter()
            .map(|c| format!("{}={}", contest.name(c), round.tallies[c as usize]))
            .collect();
        let action = if round.standing.len() == 1 {
            "wins"
        } else {
            "eliminated"
        };
        println!(
            "round {}: {} exhausted={} | {} {}",
            k + 1,
            tallies.join(" "),
            round.exhausted,
            contest.name(round.eliminated),
            action
        );
    }
    for tie in &result.tie_events {
        println!(
            "tie round {}: {{{}}} -> {} eliminated",
            tie.round + 1,
            join_names(contest, tie.tied.iter().copied(), ","),
            contest.name(tie.eliminated)
        );
    }
    Ok(())
}

fn explain(contest: &Contest, winner: CandidateId, max_candidates: usize) -> awaire::Result<()> {
    let setup = AuditSetup::new(contest.num_candidates(), winner, max_candidates)?;
    for req in setup.pool().requirements() {
        println!(
            "DB {}>{} | S={{{}}} | true_mean={:.6}",
            contest.name(req.ahead),
            contest.name(req.behind),
            join_names(contest, req.standing.iter(), ","),
            req.mean(contest.ballots())
        );
    }
    Ok(())
}

/// Maps records parsed with their own roster onto the contest roster.
fn align_records(contest: &Contest, records: &Contest) -> awaire::Result<Vec<Ballot>> {
    let map = records
        .candidates()
        .iter()
        .map(|c| {
            contest.find(&c.name).ok_or_else(|| {
                Error::RosterMismatch(format!("records name unknown candidate {:?}", c.name))
            })
        })
        .collect::<awaire::Result<Vec<_>>>()?;
    records
        .ballots()
        .iter()
        .map(|b| Ballot::new(b.ranking().iter().map(|&c| map[c as usize]).collect()))
        .collect()
}

fn simulate(args: SimulateArgs) -> awaire::Result<()> {
    let contest = match (&args.ballots, args.pathological) {
        (Some(path), _) => load(path, args.format)?,
        (None, Some(m)) => generate_pathological(m)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let winner = if args.runner_up {
        runner_up(&contest)
    } else if let Some(name) = &args.reported_winner {
        find(&contest, name)?
    } else {
        contest.reported_winner()
    };
    let config = AuditConfig {
        risk_limit: args.alpha,
        scheme: if args.fixed_weights {
            WeightScheme::Fixed
        } else {
            args.scheme
        },
        update_every: args.update_every,
        alpha_params: awaire::AlphaConfig {
            mu0: args.mu0,
            eta0: args.eta0,
            d: args.d,
        },
        max_candidates: args.max_candidates,
    };
    config.validate()?;
    let setup = Arc::new(AuditSetup::new(
        contest.num_candidates(),
        winner,
        config.max_candidates,
    )?);
    let records = match (&args.cvrs, args.oracle_cvrs) {
        (Some(path), _) => Some(align_records(&contest, &load(path, args.format)?)?),
        (None, true) => Some(contest.ballots().to_vec()),
        (None, false) => None,
    };
    let records = match (records, &args.permute_labels) {
        (Some(r), Some(perm)) => Some(permute_labels(&r, perm)?),
        (None, Some(_)) => {
            return Err(Error::InvalidConfig(
                "--permute-labels needs --cvrs or --oracle-cvrs".into(),
            ))
        }
        (r, None) => r,
    };
    let tuning = records
        .map(|r| tune_from_cvrs(&r, &setup, &config))
        .transpose()?;
    if tuning.is_none() && config.scheme == WeightScheme::Fixed {
        log::warn!("fixed weights without records keep every requirement at weight one");
    }
    let sim = Simulator::with_setup(&contest, setup, config, tuning)?;
    let summary = sim.run_replications(args.reps, args.seed)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        summary.write_trials_csv(io::BufWriter::new(fs::File::create(
            dir.join("trials.csv"),
        )?))?;
        fs::write(dir.join("summary.json"), summary.to_json() + "\n")?;
    }
    println!("{}", summary.to_json());
    Ok(())
}

fn print_status(s: &StatusBody) {
    let rejected = s.orders.iter().filter(|o| o.rejected).count();
    println!(
        "t={}/{} decision={} rejected={}/{}",
        s.t,
        s.ballot_count,
        s.decision,
        rejected,
        s.orders.len()
    );
    if let Some(outcome) = &s.outcome {
        println!("full count order: {}", outcome.join(" > "));
    }
}

fn audit(data: &Path, manifest: Option<PathBuf>, resume: Option<String>) -> awaire::Result<()> {
    let store = SessionStore::open(data)?;
    let status = match (manifest, resume) {
        (Some(path), _) => {
            let request: CreateRequest = serde_json::from_slice(&fs::read(path)?)
                .map_err(|e| Error::InvalidConfig(format!("manifest: {e}")))?;
            store.create(request)?
        }
        (None, Some(id)) => store.status(&id)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let id = status.session_id.clone();
    println!("session {id}");
    println!("candidates: {}", status.candidates.join(", "));
    println!("enter each sampled ballot as A>B>C, '.' for a blank ballot, 'q' to stop");
    print_status(&status);
    if status.decision != "ongoing" {
        return Ok(());
    }
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("ballot {}> ", store.status(&id)?.t + 1);
        io::stdout().flush()?;
        let Some(line) = lines.next() else { break };
        let line = line?;
        let text = line.trim();
        let ranking: Vec<String> = match text {
            "" => continue,
            "q" | "quit" => break,
            "." => Vec::new(),
            _ => text.split('>').map(|s| s.trim().to_owned()).collect(),
        };
        match store.submit(&id, &ranking) {
            Ok(s) => {
                print_status(&s);
                if s.decision != "ongoing" {
                    break;
                }
            }
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(())
}
