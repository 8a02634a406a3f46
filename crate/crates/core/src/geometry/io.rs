//! OBJ and binary PLY reading and writing.

use std::io::{self, BufRead, Read, Write};

use super::mesh::Mesh;
use crate::math::Point3;

/// Writes ASCII OBJ with 1-based indices. Triangle pairs recorded in
/// `quad_pairs` are written as quads.
pub fn write_obj<W: Write>(m: &Mesh, mut w: W) -> io::Result<()> {
    for p in &m.vertices {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    let mut second = vec![false; m.triangles.len()];
    let mut quad_of = vec![None; m.triangles.len()];
    for q in &m.quad_pairs {
        let (a, b) = (q[0] as usize, q[1] as usize);
        if a < m.triangles.len() && b < m.triangles.len() {
            if let Some(quad) = merge_quad(&m.triangles[a], &m.triangles[b]) {
                quad_of[a] = Some(quad);
                second[b] = true;
            }
        }
    }
    for (i, t) in m.triangles.iter().enumerate() {
        if second[i] {
            continue;
        }
        match quad_of[i] {
            Some(q) => writeln!(w, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)?,
            None => writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?,
        }
    }
    Ok(())
}

/// Quad from two triangles sharing an edge with opposite direction.
fn merge_quad(t1: &[u32; 3], t2: &[u32; 3]) -> Option<[u32; 4]> {
    for e in 0..3 {
        let (a, b) = (t1[e], t1[(e + 1) % 3]);
        for f in 0..3 {
            if t2[f] == b && t2[(f + 1) % 3] == a {
                let other = t2[(f + 2) % 3];
                let c = t1[(e + 2) % 3];
                return Some([a, other, b, c]);
            }
        }
    }
    None
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads `v` and `f` records; polygons are fan-triangulated.
pub fn read_obj<R: BufRead>(r: R) -> io::Result<Mesh> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
                if c.len() != 3 {
                    return Err(bad(format!("line {}: vertex needs 3 coordinates", ln + 1)));
                }
                verts.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| bad(format!("line {}: bad face index", ln + 1)))?;
                    let n = verts.len() as i64;
                    let j = if i < 0 { n + i } else { i - 1 };
                    if j < 0 || j >= n {
                        return Err(bad(format!("line {}: face index out of range", ln + 1)));
                    }
                    idx.push(j as u32);
                }
                if idx.len() < 3 {
                    return Err(bad(format!("line {}: face needs 3 vertices", ln + 1)));
                }
                for k in 1..idx.len() - 1 {
                    tris.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(Mesh::new(verts, tris))
}

fn ply_header<W: Write>(w: &mut W, comments: &[String], vertices: usize, faces: Option<usize>) -> io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    for c in comments {
        writeln!(w, "comment {}", c.replace('\n', " "))?;
    }
    writeln!(w, "element vertex {vertices}")?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    if let Some(f) = faces {
        writeln!(w, "element face {f}")?;
        writeln!(w, "property list uchar int vertex_indices")?;
    }
    writeln!(w, "end_header")
}

/// Binary little-endian PLY with `double` coordinates and triangle faces.
pub fn write_ply_mesh<W: Write>(m: &Mesh, mut w: W, comments: &[String]) -> io::Result<()> {
    ply_header(&mut w, comments, m.vertices.len(), Some(m.triangles.len()))?;
    for p in &m.vertices {
        for c in [p.x, p.y, p.z] {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    for t in &m.triangles {
        w.write_all(&[3u8])?;
        for i in t {
            w.write_all(&(*i as i32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Binary little-endian PLY point set with `double` coordinates.
pub fn write_ply_points<W: Write>(points: &[Point3], mut w: W, comments: &[String]) -> io::Result<()> {
    ply_header(&mut w, comments, points.len(), None)?;
    for p in points {
        for c in [p.x, p.y, p.z] {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Contents of a PLY file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyData {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<u32>>,
    pub comments: Vec<String>,
}

impl PlyData {
    /// Fan-triangulated mesh.
    pub fn to_mesh(&self) -> Mesh {
        let mut tris = Vec::new();
        for f in &self.faces {
            for k in 1..f.len().saturating_sub(1) {
                tris.push([f[0], f[k], f[k + 1]]);
            }
        }
        Mesh::new(self.vertices.clone(), tris)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_bin(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

enum Prop {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

struct Element {
    name: String,
    count: usize,
    props: Vec<Prop>,
}

/// Reads ASCII or binary little-endian PLY with `x, y, z` vertex
/// properties and an optional `vertex_indices` face list.
pub fn read_ply<R: Read>(mut r: R) -> io::Result<PlyData> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let end = find_subslice(&data, b"end_header")
        .ok_or_else(|| bad("missing end_header"))?;
    let mut body = end + b"end_header".len();
    if data.get(body) == Some(&b'\r') {
        body += 1;
    }
    if data.get(body) == Some(&b'\n') {
        body += 1;
    }
    let header = std::str::from_utf8(&data[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(bad("not a PLY file"));
    }
    let mut binary = None;
    let mut comments = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => binary = Some(false),
            ["format", "binary_little_endian", _] => binary = Some(true),
            ["format", other, _] => return Err(bad(format!("unsupported PLY format {other}"))),
            ["comment", ..] => comments.push(line.trim_start()["comment".len()..].trim().to_string()),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| bad("bad element count"))?,
                props: Vec::new(),
            }),
            ["property", "list", ct, it, name] => {
                let (ct, it) = (
                    Scalar::parse(ct).ok_or_else(|| bad("bad list count type"))?,
                    Scalar::parse(it).ok_or_else(|| bad("bad list item type"))?,
                );
                elements
                    .last_mut()
                    .ok_or_else(|| bad("property before element"))?
                    .props
                    .push(Prop::List(name.to_string(), ct, it));
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty).ok_or_else(|| bad(format!("bad property type {ty}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| bad("property before element"))?
                    .props
                    .push(Prop::Scalar(name.to_string(), ty));
            }
            [] | ["obj_info", ..] => {}
            _ => return Err(bad(format!("unrecognized header line `{line}`"))),
        }
    }
    let binary = binary.ok_or_else(|| bad("missing format line"))?;
    let mut out = PlyData {
        vertices: Vec::new(),
        faces: Vec::new(),
        comments,
    };
    let mut cursor = Cursor {
        data: &data[body..],
        pos: 0,
        binary,
    };
    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [0.0f64; 3];
            let mut face = None;
            for p in &el.props {
                match p {
                    Prop::Scalar(name, ty) => {
                        let v = cursor.scalar(*ty)?;
                        match name.as_str() {
                            "x" => xyz[0] = v,
                            "y" => xyz[1] = v,
                            "z" => xyz[2] = v,
                            _ => {}
                        }
                    }
                    Prop::List(name, ct, it) => {
                        let n = cursor.scalar(*ct)? as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            items.push(cursor.scalar(*it)? as u32);
                        }
                        if name == "vertex_indices" || name == "vertex_index" {
                            face = Some(items);
                        }
                    }
                }
            }
            match el.name.as_str() {
                "vertex" => out.vertices.push(Point3::new(xyz[0], xyz[1], xyz[2])),
                "face" => {
                    if let Some(f) = face {
                        out.faces.push(f);
                    }
                }
                _ => {}
            }
        }
    }
    let n = out.vertices.len() as u32;
    if out.faces.iter().flatten().any(|&i| i >= n) {
        return Err(bad("face index out of range"));
    }
    Ok(out)
}

fn find_subslice(h: &[u8], n: &[u8]) -> Option<usize> {
    h.windows(n.len()).position(|w| w == n)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    binary: bool,
}

impl Cursor<'_> {
    fn scalar(&mut self, ty: Scalar) -> io::Result<f64> {
        if self.binary {
            let n = ty.size();
            let b = self
                .data
                .get(self.pos..self.pos + n)
                .ok_or_else(|| bad("unexpected end of PLY body"))?;
            self.pos += n;
            Ok(ty.read_bin(b))
        } else {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(bad("unexpected end of PLY body"));
            }
            std::str::from_utf8(&self.data[start..self.pos])
                .ok()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad("bad number in PLY body"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{cube, cylinder};

    #[test]
    fn obj_round_trip_with_quads() {
        let c = cube();
        let mut buf = Vec::new();
        write_obj(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 6);
        let back = read_obj(&buf[..]).unwrap();
        assert_eq!(back.vertices, c.vertices);
        assert!(back.watertight);
        assert_eq!(back.volume().unwrap(), 8.0);
    }

    #[test]
    fn ply_mesh_round_trip() {
        let c = cylinder(12);
        let mut buf = Vec::new();
        write_ply_mesh(&c, &mut buf, &["source test".into()]).unwrap();
        let back = read_ply(&buf[..]).unwrap();
        assert_eq!(back.comments, vec!["source test".to_string()]);
        let m = back.to_mesh();
        assert_eq!(m.vertices, c.vertices);
        assert_eq!(m.triangles, c.triangles);
    }

    #[test]
    fn ascii_ply_points() {
        let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 2 3\n";
        let d = read_ply(text.as_bytes()).unwrap();
        assert_eq!(d.vertices[1], Point3::new(1.0, 2.0, 3.0));
    }
}
