//! Command templates and bounded subprocess execution.
//!
//! Templates are split on whitespace once and executed without any shell.
//! Placeholders are substituted literally inside each word; a bare `{flags}`
//! word expands to the serialized flag list as separate arguments. Children
//! run in their own process group so a timeout kill takes their descendants
//! down with them.

use std::io;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::classify::ExitDescriptor;
use super::CampaignError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandTemplate {
    raw: String,
    words: Vec<String>,
}

impl CommandTemplate {
    pub fn parse(raw: &str) -> Result<CommandTemplate, CampaignError> {
        let words: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
        if words.is_empty() {
            return Err(CampaignError::InvalidSpec(
                "command template is empty".to_string(),
            ));
        }
        Ok(CommandTemplate {
            raw: raw.to_string(),
            words,
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn has_placeholder(&self, name: &str) -> bool {
        let needle = format!("{{{name}}}");
        self.words.iter().any(|w| w.contains(&needle))
    }

    /// Substitutes `{key}` occurrences in every word. A word that is exactly
    /// `{flags}` is replaced by the whole flag list (possibly empty).
    pub fn instantiate(
        &self,
        flags: Option<&[String]>,
        substitutions: &[(&str, &str)],
    ) -> Vec<String> {
        let mut argv = Vec::with_capacity(self.words.len());
        for word in &self.words {
            if word == "{flags}" {
                if let Some(flags) = flags {
                    argv.extend(flags.iter().cloned());
                }
                continue;
            }
            let mut out = word.clone();
            for (key, value) in substitutions {
                out = out.replace(&format!("{{{key}}}"), value);
            }
            argv.push(out);
        }
        argv
    }
}

/// Captured result of one bounded subprocess run.
#[derive(Debug, Clone)]
pub struct CmdOutput {
    pub exit: ExitDescriptor,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub duration_secs: f64,
}

impl CmdOutput {
    pub fn timed_out(&self) -> bool {
        self.exit == ExitDescriptor::TimedOut
    }
}

fn exit_descriptor(status: std::process::ExitStatus) -> ExitDescriptor {
    if let Some(code) = status.code() {
        return ExitDescriptor::Code(code);
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        if let Some(signal) = status.signal() {
            return ExitDescriptor::Signal(signal);
        }
    }
    ExitDescriptor::Code(-1)
}

/// Runs `argv` with stdin closed and both streams captured, killing the
/// whole process group if `timeout` elapses. The child's environment is the
/// parent's, unchanged.
pub fn run_with_timeout(
    argv: &[String],
    timeout: Duration,
    cwd: Option<&Path>,
) -> io::Result<CmdOutput> {
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let start = Instant::now();
    let child = cmd.spawn()?;
    let pid = child.id() as i32;

    // wait_with_output drains the pipes on its own thread, so a chatty child
    // can never deadlock the timeout watch
    let (tx, rx) = mpsc::channel();
    let waiter = thread::spawn(move || {
        let _ = tx.send(child.wait_with_output());
    });

    let (output, timed_out) = match rx.recv_timeout(timeout) {
        Ok(result) => (result?, false),
        Err(_) => {
            #[cfg(unix)]
            unsafe {
                libc::killpg(pid, libc::SIGKILL);
            }
            #[cfg(not(unix))]
            let _ = pid;
            let result = rx
                .recv()
                .unwrap_or_else(|_| Err(io::Error::other("wait thread vanished")));
            (result?, true)
        }
    };
    let _ = waiter.join();

    Ok(CmdOutput {
        exit: if timed_out {
            ExitDescriptor::TimedOut
        } else {
            exit_descriptor(output.status)
        },
        stdout: output.stdout,
        stderr: output.stderr,
        duration_secs: start.elapsed().as_secs_f64(),
    })
}
