//! Wire formats: the binary frame message and the JSON text messages.

use serde::{Deserialize, Serialize};
use trailnet::analysis::NetworkMetrics;
use trailnet::io::quantise_trail;
use trailnet::model::TrailField;
use trailnet::ConfigError;

pub const FRAME_MAGIC: &[u8; 4] = b"EMN1";
/// Magic, step, width, height and flags.
pub const FRAME_HEADER_LEN: usize = 21;
/// Flag bit set when an agent-occupancy bitmap follows the trail bytes.
pub const FLAG_AGENT_OVERLAY: u8 = 1;

/// Bytes per bitmap row: one bit per cell, rows padded to whole bytes.
pub fn bitmap_row_bytes(width: usize) -> usize {
    width.div_ceil(8)
}

/// Total message length implied by a header.
pub fn frame_len(width: usize, height: usize, overlay: bool) -> usize {
    let bitmap = if overlay { bitmap_row_bytes(width) * height } else { 0 };
    FRAME_HEADER_LEN + width * height + bitmap
}

/// Encode a frame. The bitmap packs cells row-major, most significant bit
/// first within each byte.
pub fn encode_frame(
    step: u64,
    trail: &TrailField,
    cap: f64,
    occupancy: Option<&[bool]>,
) -> Result<Vec<u8>, ConfigError> {
    let (w, h) = (trail.width(), trail.height());
    let pixels = quantise_trail(trail, cap)?;
    let mut out = Vec::with_capacity(frame_len(w, h, occupancy.is_some()));
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.push(if occupancy.is_some() { FLAG_AGENT_OVERLAY } else { 0 });
    out.extend_from_slice(&pixels);
    if let Some(occ) = occupancy {
        assert_eq!(occ.len(), w * h, "occupancy size mismatch");
        let row_bytes = bitmap_row_bytes(w);
        for row in occ.chunks(w) {
            let mut packed = vec![0u8; row_bytes];
            for (x, _) in row.iter().enumerate().filter(|(_, &o)| o) {
                packed[x / 8] |= 0x80 >> (x % 8);
            }
            out.extend_from_slice(&packed);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedFrame {
    pub step: u64,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub occupancy: Option<Vec<bool>>,
}

/// Parse a frame, checking the magic and the exact length.
pub fn decode_frame(data: &[u8]) -> Result<DecodedFrame, String> {
    if data.len() < FRAME_HEADER_LEN {
        return Err(format!("frame too short: {} bytes", data.len()));
    }
    if &data[..4] != FRAME_MAGIC {
        return Err("bad magic".into());
    }
    let step = u64::from_le_bytes(data[4..12].try_into().expect("8 bytes"));
    let width = u32::from_le_bytes(data[12..16].try_into().expect("4 bytes")) as usize;
    let height = u32::from_le_bytes(data[16..20].try_into().expect("4 bytes")) as usize;
    let flags = data[20];
    let overlay = flags & FLAG_AGENT_OVERLAY != 0;
    let expected = frame_len(width, height, overlay);
    if data.len() != expected {
        return Err(format!("frame length {} but header implies {expected}", data.len()));
    }
    let body = &data[FRAME_HEADER_LEN..];
    let pixels = body[..width * height].to_vec();
    let occupancy = overlay.then(|| {
        let bitmap = &body[width * height..];
        let row_bytes = bitmap_row_bytes(width);
        (0..width * height)
            .map(|i| {
                let (x, y) = (i % width, i / width);
                bitmap[y * row_bytes + x / 8] & (0x80 >> (x % 8)) != 0
            })
            .collect()
    });
    Ok(DecodedFrame { step, width, height, pixels, occupancy })
}

/// JSON text messages sent to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Metrics(NetworkMetrics),
    Ack {
        applied_at_step: u64,
        /// Id assigned by an `add_node` command.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        node_id: Option<u32>,
    },
    Error { reason: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let t = TrailField::from_values(2, 2, vec![0.0, 25.0, 12.5, 50.0]);
        let f = encode_frame(7, &t, 25.0, None).unwrap();
        assert_eq!(f.len(), 21 + 4);
        assert_eq!(&f[..4], b"EMN1");
        assert_eq!(&f[4..12], &7u64.to_le_bytes());
        assert_eq!(&f[12..16], &2u32.to_le_bytes());
        assert_eq!(f[20], 0);
        assert_eq!(&f[21..], &[0, 255, 128, 255]);
    }

    #[test]
    fn bitmap_rows_are_padded() {
        let (w, h) = (10, 3);
        let t = TrailField::new(w, h);
        let mut occ = vec![false; w * h];
        occ[0] = true;
        occ[9] = true;
        occ[2 * w + 8] = true;
        let f = encode_frame(1, &t, 1.0, Some(&occ)).unwrap();
        assert_eq!(f.len(), 21 + 30 + 2 * 3);
        assert_eq!(f[20], FLAG_AGENT_OVERLAY);
        assert_eq!(&f[51..], &[0x80, 0x40, 0, 0, 0, 0x80]);
        let d = decode_frame(&f).unwrap();
        assert_eq!(d.occupancy.unwrap(), occ);
    }

    #[test]
    fn decode_rejects_bad_lengths() {
        let t = TrailField::new(3, 3);
        let mut f = encode_frame(1, &t, 1.0, None).unwrap();
        f.push(0);
        assert!(decode_frame(&f).is_err());
        assert!(decode_frame(b"EMN1").is_err());
    }

    #[test]
    fn message_shapes() {
        let ack = ServerMessage::Ack { applied_at_step: 12, node_id: None }.to_json();
        assert_eq!(ack, r#"{"type":"ack","applied_at_step":12}"#);
        let err = ServerMessage::Error { reason: "bad".into() }.to_json();
        assert_eq!(err, r#"{"type":"error","reason":"bad"}"#);
        let m = ServerMessage::Metrics(NetworkMetrics { step: 50, ..Default::default() }).to_json();
        assert!(m.starts_with(r#"{"type":"metrics","step":50,"#), "{m}");
    }
}
