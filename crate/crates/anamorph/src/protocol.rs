//! Newline-delimited JSON frames exchanged with an external detector over stdio.
//!
//! ```text
//! -> {"type":"hello","version":1}
//! <- {"type":"ready","model":"yolov5s"}
//! -> {"type":"detect","image_id":"g00000","image_path":"/tmp/x/g00000.png"}
//! <- {"type":"result","image_id":"g00000","detections":[{"class":"car","confidence":0.91,"bbox":[0.1,0.2,0.3,0.2]}]}
//! <- {"type":"error","image_id":"g00001","message":"cannot read image"}
//! ```

use anamorph_core::oracle::{Detection, DetectionSet, OracleError};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Frame {
    Hello { version: u32 },
    Ready { model: String },
    Detect { image_id: String, image_path: String },
    Result { image_id: String, detections: Vec<Detection> },
    Error { image_id: String, message: String },
}

impl Frame {
    /// One line, terminated by `\n`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("frames always serialize");
        out.push(b'\n');
        out
    }

    /// Parses exactly one frame; a single trailing `\n` (or `\r\n`) is allowed.
    pub fn decode(bytes: &[u8]) -> Result<Self, OracleError> {
        let line = bytes.strip_suffix(b"\n").unwrap_or(bytes);
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.contains(&b'\n') {
            return Err(protocol("more than one line in a frame"));
        }
        let frame: Frame = serde_json::from_slice(line).map_err(|e| protocol(e.to_string()))?;
        if let Frame::Result { detections, .. } = &frame {
            for d in detections {
                d.validate().map_err(|e| protocol(e.to_string()))?;
            }
        }
        Ok(frame)
    }
}

fn protocol(msg: impl Into<String>) -> OracleError {
    OracleError::Protocol(msg.into())
}

pub fn encode_hello() -> Vec<u8> {
    Frame::Hello { version: PROTOCOL_VERSION }.encode()
}

pub fn encode_request(image_path: &str, image_id: &str) -> Vec<u8> {
    Frame::Detect { image_id: image_id.into(), image_path: image_path.into() }.encode()
}

pub fn encode_response(set: &DetectionSet) -> Vec<u8> {
    Frame::Result { image_id: set.image_id.clone(), detections: set.detections.clone() }.encode()
}

/// A `result` frame as a detection set. An `error` frame becomes [`OracleError::Remote`],
/// anything else is a protocol error.
pub fn decode_response(bytes: &[u8]) -> Result<DetectionSet, OracleError> {
    match Frame::decode(bytes)? {
        Frame::Result { image_id, detections } => Ok(DetectionSet { detections, image_id }),
        Frame::Error { image_id, message } => Err(OracleError::Remote { image_id, message }),
        other => Err(protocol(format!("expected a result frame, got {other:?}"))),
    }
}

/// The model name from a `ready` frame.
pub fn decode_ready(bytes: &[u8]) -> Result<String, OracleError> {
    match Frame::decode(bytes)? {
        Frame::Ready { model } => Ok(model),
        other => Err(protocol(format!("expected a ready frame, got {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anamorph_core::oracle::BBox;

    #[test]
    fn request_bytes_are_exact() {
        assert_eq!(
            encode_request("/tmp/a b.png", "g00001"),
            b"{\"type\":\"detect\",\"image_id\":\"g00001\",\"image_path\":\"/tmp/a b.png\"}\n"
        );
        assert_eq!(encode_hello(), b"{\"type\":\"hello\",\"version\":1}\n");
    }

    #[test]
    fn response_bytes_are_exact() {
        let set = DetectionSet {
            detections: vec![Detection::new("car", 0.5, BBox { x: 0.25, y: 0.0, w: 0.5, h: 1.0 }).unwrap()],
            image_id: "x".into(),
        };
        assert_eq!(
            std::str::from_utf8(&encode_response(&set)).unwrap(),
            "{\"type\":\"result\",\"image_id\":\"x\",\"detections\":[{\"class\":\"car\",\"confidence\":0.5,\"bbox\":[0.25,0.0,0.5,1.0]}]}\n"
        );
    }

    #[test]
    fn empty_set_round_trips() {
        let set = DetectionSet::empty("e");
        assert_eq!(decode_response(&encode_response(&set)).unwrap(), set);
    }

    #[test]
    fn out_of_range_confidence_is_rejected() {
        let line = br#"{"type":"result","image_id":"a","detections":[{"class":"car","confidence":1.2,"bbox":[0,0,0.5,0.5]}]}"#;
        assert!(matches!(decode_response(line), Err(OracleError::Protocol(_))));
    }

    #[test]
    fn malformed_frames_are_rejected() {
        let bad: [&[u8]; 8] = [
            b"",
            b"not json",
            br#"{"type":"result","image_id":"a"}"#,
            br#"{"type":"teleport","image_id":"a"}"#,
            br#"{"image_id":"a","detections":[]}"#,
            br#"{"type":"result","image_id":"a","detections":[{"class":"car","confidence":0.5,"bbox":[0,0,0.5]}]}"#,
            br#"{"type":"result","image_id":"a","detections":[{"class":"car","confidence":0.5,"bbox":[0.8,0,0.5,0.5]}]}"#,
            b"{\"type\":\"ready\",\"model\":\"m\"}\n{\"type\":\"ready\",\"model\":\"m\"}\n",
        ];
        for b in bad {
            assert!(matches!(decode_response(b), Err(OracleError::Protocol(_))), "{:?}", String::from_utf8_lossy(b));
        }
        assert!(matches!(decode_response(br#"{"type":"ready","model":"m"}"#), Err(OracleError::Protocol(_))));
    }

    #[test]
    fn error_frame_is_remote_error() {
        let e = decode_response(br#"{"type":"error","image_id":"q","message":"boom"}"#).unwrap_err();
        assert_eq!(e, OracleError::Remote { image_id: "q".into(), message: "boom".into() });
    }

    #[test]
    fn ready_frame() {
        assert_eq!(decode_ready(b"{\"type\":\"ready\",\"model\":\"stub\"}\r\n").unwrap(), "stub");
        assert!(decode_ready(&encode_hello()).is_err());
    }
}
