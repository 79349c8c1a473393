//! Subprocess adapter for external blackboxes.
//!
//! The child process reads one canonical point line per evaluation on its
//! standard input and must answer with one line `f g_1 ... g_J` (the token
//! `inf` is allowed). A malformed or missing reply, or a non-finite
//! objective, maps to a hidden failure; the solver keeps going. Exactly one
//! request is in flight per process.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use crate::domain::{Domain, Evaluation, Point};
use crate::error::{Error, Result};

use super::Problem;

struct ChildIo {
    child: Child,
    stdin: std::process::ChildStdin,
    stdout: BufReader<std::process::ChildStdout>,
}

impl Drop for ChildIo {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn request(io: &mut ChildIo, point: &Point, n_constraints: usize) -> Option<Evaluation> {
    writeln!(io.stdin, "{}", point.encode()).ok()?;
    io.stdin.flush().ok()?;
    let mut line = String::new();
    let read = io.stdout.read_line(&mut line).ok()?;
    if read == 0 {
        return None;
    }
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != n_constraints + 1 {
        return None;
    }
    let mut values = Vec::with_capacity(tokens.len());
    for t in tokens {
        values.push(t.parse::<f64>().ok()?);
    }
    let f = values[0];
    if !f.is_finite() {
        return None;
    }
    Some(Evaluation::new(f, values[1..].to_vec()))
}

/// Wraps a line-protocol subprocess as a [`Problem`].
///
/// Spawning the process is the only fatal error; after startup every
/// protocol violation is reported as a hidden failure.
pub fn external_blackbox(
    command: &[String],
    name: &str,
    domain: Domain,
    n_constraints: usize,
) -> Result<Problem> {
    if command.is_empty() {
        return Err(Error::Config("external blackbox needs a command".into()));
    }
    let mut child = Command::new(&command[0])
        .args(&command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Process(format!("failed to spawn '{}': {e}", command[0])))?;
    let stdin = child
        .stdin
        .take()
        .ok_or_else(|| Error::Process("child stdin unavailable".into()))?;
    let stdout = child
        .stdout
        .take()
        .ok_or_else(|| Error::Process("child stdout unavailable".into()))?;
    let io = Mutex::new(ChildIo { child, stdin, stdout: BufReader::new(stdout) });

    Ok(Problem::new(name, domain, n_constraints, None, move |point: &Point| {
        let mut guard = match io.lock() {
            Ok(guard) => guard,
            Err(_) => return Evaluation::hidden_failure(n_constraints),
        };
        request(&mut guard, point, n_constraints)
            .unwrap_or_else(|| Evaluation::hidden_failure(n_constraints))
    }))
}
