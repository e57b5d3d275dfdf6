//! Profile CSV and voxel header/sidecar formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::voxel::uniform_edges;
use super::{ProfileSet, VoxelSet};
use crate::error::{Error, Result};

pub const VOXEL_ENCODING: &str = "raw-row-major-u8";
pub const CHANNEL_ENCODING: &str = "raw-row-major-f64le";

/// A float64 raster channel stored next to the occupancy sidecar; empty cells hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub name: String,
    pub encoding: String,
    pub data: String,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

pub fn profile_to_csv(p: &ProfileSet) -> String {
    let mut s = String::from("t,rho\n");
    for (t, r) in p.heights().iter().zip(p.radii()) {
        writeln!(s, "{t},{r}").unwrap();
    }
    s
}

pub fn profile_from_csv(text: &str) -> Result<ProfileSet> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "t,rho" => {}
        Some((_, h)) => return Err(parse_err("line 1", format!("expected header `t,rho`, found `{h}`"))),
        None => return Err(parse_err("line 1", "empty profile file")),
    }
    let mut heights = Vec::new();
    let mut radii = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let loc = format!("line {}", i + 1);
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(loc, "expected two comma-separated values"));
        };
        let t: f64 = a.trim().parse().map_err(|e| parse_err(&loc, format!("bad height: {e}")))?;
        let r: f64 = b.trim().parse().map_err(|e| parse_err(&loc, format!("bad radius: {e}")))?;
        heights.push(t);
        radii.push(r);
    }
    ProfileSet::new(heights, radii)
}

/// JSON header describing a voxel raster stored in a binary sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelHeader {
    pub dim: usize,
    /// Cell edge length for uniform grids, `null` when `edges` is given.
    pub spacing: Option<f64>,
    pub origin: Vec<f64>,
    pub shape: Vec<usize>,
    pub encoding: String,
    /// Explicit per-axis grid planes for grids not reproducible from `origin` and `spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Vec<f64>>>,
    /// Name of the sidecar file, relative to the header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<ChannelInfo>,
}

impl VoxelHeader {
    pub fn for_set(v: &VoxelSet) -> Self {
        let shape = v.shape();
        let origin: Vec<f64> = v.all_edges().iter().map(|e| e[0]).collect();
        let h = v.edges(0)[1] - v.edges(0)[0];
        let reproducible = v
            .all_edges()
            .iter()
            .zip(&shape)
            .all(|(e, &s)| uniform_edges(e[0], h, s) == *e);
        Self {
            dim: v.dim(),
            spacing: reproducible.then_some(h),
            origin,
            shape,
            encoding: VOXEL_ENCODING.to_string(),
            edges: (!reproducible).then(|| v.all_edges().to_vec()),
            data: None,
            channels: Vec::new(),
        }
    }

    fn grid_edges(&self) -> Result<Vec<Vec<f64>>> {
        if self.origin.len() != self.dim || self.shape.len() != self.dim {
            return Err(parse_err("header", "origin and shape must have `dim` entries"));
        }
        match (&self.edges, self.spacing) {
            (Some(e), _) => {
                if e.len() != self.dim || e.iter().zip(&self.shape).any(|(a, &s)| a.len() != s + 1) {
                    return Err(parse_err("header.edges", "edge lists do not match shape"));
                }
                Ok(e.clone())
            }
            (None, Some(h)) => Ok((0..self.dim).map(|k| uniform_edges(self.origin[k], h, self.shape[k])).collect()),
            (None, None) => Err(parse_err("header", "need `spacing` or `edges`")),
        }
    }
}

pub fn voxel_from_parts(header: &VoxelHeader, bytes: &[u8]) -> Result<VoxelSet> {
    if header.encoding != VOXEL_ENCODING {
        return Err(parse_err("header.encoding", format!("unsupported encoding `{}`", header.encoding)));
    }
    let edges = header.grid_edges()?;
    let cells: usize = header.shape.iter().product();
    if bytes.len() != cells {
        return Err(parse_err("sidecar", format!("expected {cells} bytes, found {}", bytes.len())));
    }
    if let Some(off) = bytes.iter().position(|&b| b > 1) {
        return Err(parse_err(format!("sidecar byte {off}"), format!("value {} is not 0 or 1", bytes[off])));
    }
    VoxelSet::new(edges, bytes.to_vec())
}

fn sidecar_path(header_path: &Path, header: &VoxelHeader) -> PathBuf {
    match &header.data {
        Some(name) => header_path.with_file_name(name),
        None => header_path.with_extension("bin"),
    }
}

/// Write `<path>` (JSON header) and its `.bin` sidecar.
pub fn write_voxel(path: &Path, v: &VoxelSet) -> Result<()> {
    let mut header = VoxelHeader::for_set(v);
    let bin = path.with_extension("bin");
    header.data = bin.file_name().map(|s| s.to_string_lossy().into_owned());
    fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
    fs::write(bin, v.occupancy())?;
    Ok(())
}

/// Like [`write_voxel`], plus one `<stem>.<name>.f64` sidecar per channel.
///
/// Each channel is a dense raster over the full grid in the occupancy order.
pub fn write_voxel_with_channels(path: &Path, v: &VoxelSet, channels: &[(&str, Vec<f64>)]) -> Result<()> {
    let mut header = VoxelHeader::for_set(v);
    let bin = path.with_extension("bin");
    header.data = bin.file_name().map(|s| s.to_string_lossy().into_owned());
    let cells = v.occupancy().len();
    for (name, values) in channels {
        if values.len() != cells {
            return Err(Error::Domain(format!("channel `{name}` has {} values for {cells} cells", values.len())));
        }
        let file = path.with_extension(format!("{name}.f64"));
        let bytes: Vec<u8> = values.iter().flat_map(|x| x.to_le_bytes()).collect();
        fs::write(&file, bytes)?;
        header.channels.push(ChannelInfo {
            name: name.to_string(),
            encoding: CHANNEL_ENCODING.to_string(),
            data: file.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        });
    }
    fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
    fs::write(bin, v.occupancy())?;
    Ok(())
}

/// Reads a channel written by [`write_voxel_with_channels`].
pub fn read_channel(path: &Path, name: &str) -> Result<Vec<f64>> {
    let header: VoxelHeader = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| parse_err(format!("{}:{}:{}", path.display(), e.line(), e.column()), e.to_string()))?;
    let info = header
        .channels
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| parse_err("header.channels", format!("no channel `{name}`")))?;
    if info.encoding != CHANNEL_ENCODING {
        return Err(parse_err("header.channels", format!("unsupported encoding `{}`", info.encoding)));
    }
    let bytes = fs::read(path.with_file_name(&info.data))?;
    let cells: usize = header.shape.iter().product();
    if bytes.len() != 8 * cells {
        return Err(parse_err(&info.data, format!("expected {} bytes, found {}", 8 * cells, bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn read_voxel(path: &Path) -> Result<VoxelSet> {
    let text = fs::read_to_string(path)?;
    let header: VoxelHeader = serde_json::from_str(&text)
        .map_err(|e| parse_err(format!("{}:{}:{}", path.display(), e.line(), e.column()), e.to_string()))?;
    let bytes = fs::read(sidecar_path(path, &header))?;
    voxel_from_parts(&header, &bytes)
}

pub fn write_profile(path: &Path, p: &ProfileSet) -> Result<()> {
    fs::write(path, profile_to_csv(p))?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<ProfileSet> {
    profile_from_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_csv_round_trip_is_bit_exact() {
        let p = ProfileSet::new(vec![0.0, 0.1 + 0.2, 1.0 / 3.0, 1.0 / 3.0, 2.0], vec![1.0, 0.7, 1e-17, 0.5, 0.0]).unwrap();
        let q = profile_from_csv(&profile_to_csv(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn profile_csv_reports_line() {
        let err = profile_from_csv("t,rho\n0,1\n0.5,x\n1,0\n").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert_eq!(location, "line 3"),
            other => panic!("unexpected {other}"),
        }
        assert!(profile_from_csv("x,y\n").is_err());
    }

    #[test]
    fn voxel_round_trip_uniform_and_scaled() {
        let v = VoxelSet::uniform(2, 0.1, &[-0.3, 0.0], &[3, 2], vec![1, 0, 1, 1, 0, 1]).unwrap();
        let h = VoxelHeader::for_set(&v);
        assert!(h.edges.is_none());
        assert_eq!(voxel_from_parts(&h, v.occupancy()).unwrap(), v);
        let s = v.scaled(1.0 / 3.0).unwrap().with_plane(0, -0.05);
        let h = VoxelHeader::for_set(&s);
        assert!(h.spacing.is_none());
        let back: VoxelHeader = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(voxel_from_parts(&back, s.occupancy()).unwrap(), s);
    }

    #[test]
    fn voxel_rejects_bad_sidecar() {
        let v = VoxelSet::uniform(2, 1.0, &[0.0, 0.0], &[1, 1], vec![1]).unwrap();
        let h = VoxelHeader::for_set(&v);
        assert!(voxel_from_parts(&h, &[2]).is_err());
        assert!(voxel_from_parts(&h, &[1, 1]).is_err());
    }
}
