use std::io::{BufRead, Write};
use std::path::Path;

use crate::command::{CommandLog, LoggedCommand};
use crate::error::{ConfigError, Error, Result};

/// Serialise a command log as JSON lines: `{"step":S,"command":{...}}`.
pub fn write_command_log<W: Write>(mut sink: W, log: &CommandLog) -> Result<()> {
    for entry in log.entries() {
        append_logged(&mut sink, entry)?;
    }
    sink.flush()?;
    Ok(())
}

/// Append one entry as a JSON line.
pub fn append_logged<W: Write>(sink: &mut W, entry: &LoggedCommand) -> Result<()> {
    serde_json::to_writer(&mut *sink, entry)?;
    sink.write_all(b"\n")?;
    Ok(())
}

/// Parse JSON lines; blank lines are skipped. Errors name the line.
pub fn read_command_log<R: BufRead>(source: R) -> Result<CommandLog> {
    let mut entries = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LoggedCommand = serde_json::from_str(&line)
            .map_err(|e| Error::Config(ConfigError::new(format!("line {}", i + 1), e.to_string())))?;
        entries.push(entry);
    }
    Ok(CommandLog::from_entries(entries)?)
}

pub fn load_command_log(path: impl AsRef<Path>) -> Result<CommandLog> {
    read_command_log(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::command::{Command, ParamName};

    #[test]
    fn jsonl_round_trip() {
        let mut log = CommandLog::new();
        log.push(
            3,
            Command::SetParam {
                name: ParamName::SensorAngle,
                value: 15.0,
            },
        );
        log.push(3, Command::Pause {});
        log.push(9, Command::RemoveNode { id: 1 });
        let mut buf = Vec::new();
        write_command_log(&mut buf, &log).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(r#"{"step":3,"command":{"type":"set_param","name":"SA","value":15.0}}"#));
        assert_eq!(read_command_log(&buf[..]).unwrap(), log);
    }

    #[test]
    fn decreasing_steps_rejected() {
        let text = "{\"step\":5,\"command\":{\"type\":\"pause\"}}\n{\"step\":4,\"command\":{\"type\":\"resume\"}}\n";
        assert!(read_command_log(text.as_bytes()).unwrap_err().is_config());
        let bad = "{\"step\":5,\"command\":{\"type\":\"nope\"}}\n";
        assert!(read_command_log(bad.as_bytes()).is_err());
    }
}
