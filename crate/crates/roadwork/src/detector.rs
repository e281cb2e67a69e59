//! Live detector support over a line protocol.
//!
//! For every LiDAR cycle the engine writes one frame reference line,
//! `{"t":12.3}`, and reads back exactly one `detections` stream record
//! (same schema as the detections file). An empty record means nothing was
//! detected.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use roadwork_core::DetectionRecord;
use serde::Serialize;

use crate::error::AppError;
use crate::records::{Event, StreamRecord};

pub trait Detector {
    /// Detections for the camera frame closest to `t`, if any.
    fn detect(&mut self, t: f64) -> Result<Option<DetectionRecord>, AppError>;
}

#[derive(Serialize)]
struct FrameRef {
    t: f64,
}

/// Speaks the line protocol over any reader/writer pair.
pub struct LineDetector<R, W> {
    input: R,
    output: W,
    line: String,
}

impl<R: BufRead, W: Write> LineDetector<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self {
            input,
            output,
            line: String::new(),
        }
    }
}

fn protocol_error(msg: impl std::fmt::Display) -> AppError {
    AppError::Other(format!("detector protocol: {msg}"))
}

impl<R: BufRead, W: Write> Detector for LineDetector<R, W> {
    fn detect(&mut self, t: f64) -> Result<Option<DetectionRecord>, AppError> {
        serde_json::to_writer(&mut self.output, &FrameRef { t }).map_err(protocol_error)?;
        self.output.write_all(b"\n").map_err(protocol_error)?;
        self.output.flush().map_err(protocol_error)?;

        self.line.clear();
        if self.input.read_line(&mut self.line).map_err(protocol_error)? == 0 {
            return Err(protocol_error("detector closed its output"));
        }
        let record: StreamRecord = serde_json::from_str(self.line.trim()).map_err(protocol_error)?;
        match Event::try_from(record).map_err(protocol_error)? {
            Event::Detections(r) if r.detections.is_empty() => Ok(None),
            Event::Detections(r) => Ok(Some(r)),
            _ => Err(protocol_error("expected a detections record")),
        }
    }
}

/// A detector running as a child process, spoken to over stdin/stdout.
pub struct ProcessDetector {
    child: Child,
    inner: LineDetector<BufReader<ChildStdout>, ChildStdin>,
}

impl ProcessDetector {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, AppError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| AppError::io(format!("spawning detector `{command}`"), e))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        Ok(Self {
            child,
            inner: LineDetector::new(BufReader::new(stdout), stdin),
        })
    }
}

impl Detector for ProcessDetector {
    fn detect(&mut self, t: f64) -> Result<Option<DetectionRecord>, AppError> {
        self.inner.detect(t)
    }
}

impl Drop for ProcessDetector {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn writes_frame_reference_and_reads_one_record() {
        let reply = concat!(
            r#"{"type":"detections","t":1.0,"detections":[{"class":"barrier","confidence":0.9,"box":[0,0,10,10]}]}"#,
            "\n",
            r#"{"type":"detections","t":1.1,"detections":[]}"#,
            "\n"
        );
        let mut sent = Vec::new();
        let mut d = LineDetector::new(Cursor::new(reply), &mut sent);
        let r = d.detect(1.0).unwrap().unwrap();
        assert_eq!(r.detections.len(), 1);
        assert!(d.detect(1.1).unwrap().is_none());
        assert!(d.detect(1.2).is_err());
        drop(d);
        assert_eq!(String::from_utf8(sent).unwrap(), "{\"t\":1.0}\n{\"t\":1.1}\n{\"t\":1.2}\n");
    }

    #[test]
    fn rejects_other_record_types() {
        let reply = "{\"type\":\"lidar_objects\",\"t\":1.0,\"objects\":[]}\n";
        let mut d = LineDetector::new(Cursor::new(reply), Vec::new());
        assert!(d.detect(1.0).is_err());
    }
}
