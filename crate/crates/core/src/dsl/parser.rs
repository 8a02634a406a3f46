//! Program text -> AST.
//!
//! Parsing runs in two stages: a generic value tree (calls, tuples, lists,
//! literals) and a lowering pass that checks keyword arguments against the
//! fixed statement vocabulary.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::validate::validate_program;
use super::DslError;
use crate::math::{Point2, Point3, SimilarityTransform, Vec2, Vec3};

#[derive(Debug, Clone)]
enum Value {
    Number { value: f64, is_int: bool },
    Str(String),
    Bool(bool),
    Tuple(Vec<Spanned>),
    List(Vec<Spanned>),
    Call { name: String, kwargs: Vec<(String, Span, Spanned)> },
}

#[derive(Debug, Clone)]
struct Spanned {
    value: Value,
    span: Span,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

fn join(a: Span, b: Span) -> Span {
    Span { start: a.start, end: b.end }
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eof_span(&self) -> Span {
        self.toks.last().map(|t| Span { start: t.span.end, end: t.span.end }).unwrap_or_default()
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Span> {
        match self.next() {
            Some(t) if t.tok == want => Ok(t.span),
            Some(t) => Err(Diagnostic::error(t.span, format!("expected {what}"))),
            None => Err(Diagnostic::error(self.eof_span(), format!("expected {what}, found end of input"))),
        }
    }

    fn value(&mut self) -> PResult<Spanned> {
        let Some(t) = self.next() else {
            return Err(Diagnostic::error(self.eof_span(), "expected a value, found end of input"));
        };
        match t.tok {
            Tok::Number { value, is_int } => Ok(Spanned {
                value: Value::Number { value, is_int },
                span: t.span,
            }),
            Tok::Str(s) => Ok(Spanned {
                value: Value::Str(s),
                span: t.span,
            }),
            Tok::Ident(name) => {
                if matches!(self.peek(), Some(Token { tok: Tok::LParen, .. })) {
                    self.call_rest(name, t.span)
                } else {
                    match name.as_str() {
                        "True" => Ok(Spanned {
                            value: Value::Bool(true),
                            span: t.span,
                        }),
                        "False" => Ok(Spanned {
                            value: Value::Bool(false),
                            span: t.span,
                        }),
                        _ => Err(Diagnostic::error(t.span, format!("unexpected identifier `{name}`"))),
                    }
                }
            }
            Tok::LParen => {
                let (items, end) = self.seq(Tok::RParen, "`)`")?;
                Ok(Spanned {
                    value: Value::Tuple(items),
                    span: join(t.span, end),
                })
            }
            Tok::LBracket => {
                let (items, end) = self.seq(Tok::RBracket, "`]`")?;
                Ok(Spanned {
                    value: Value::List(items),
                    span: join(t.span, end),
                })
            }
            _ => Err(Diagnostic::error(t.span, "expected a value")),
        }
    }

    fn seq(&mut self, close: Tok, what: &str) -> PResult<(Vec<Spanned>, Span)> {
        let mut items = Vec::new();
        if let Some(t) = self.peek() {
            if t.tok == close {
                let span = t.span;
                self.pos += 1;
                return Ok((items, span));
            }
        }
        loop {
            items.push(self.value()?);
            match self.next() {
                Some(t) if t.tok == Tok::Comma => {
                    if let Some(t) = self.peek() {
                        if t.tok == close {
                            let span = t.span;
                            self.pos += 1;
                            return Ok((items, span));
                        }
                    }
                }
                Some(t) if t.tok == close => return Ok((items, t.span)),
                Some(t) => return Err(Diagnostic::error(t.span, format!("expected `,` or {what}"))),
                None => return Err(Diagnostic::error(self.eof_span(), format!("expected {what}"))),
            }
        }
    }

    fn call_rest(&mut self, name: String, name_span: Span) -> PResult<Spanned> {
        self.expect(Tok::LParen, "`(`")?;
        let mut kwargs: Vec<(String, Span, Spanned)> = Vec::new();
        let end = loop {
            let t = self.next().ok_or_else(|| Diagnostic::error(self.eof_span(), "expected `)`"))?;
            match t.tok {
                Tok::RParen if kwargs.is_empty() => break t.span,
                Tok::Ident(key) => {
                    if kwargs.iter().any(|(k, _, _)| *k == key) {
                        return Err(Diagnostic::error(t.span, format!("duplicate keyword argument `{key}`")));
                    }
                    self.expect(Tok::Eq, "`=` after keyword")?;
                    let v = self.value()?;
                    kwargs.push((key, t.span, v));
                    match self.next() {
                        Some(Token { tok: Tok::Comma, .. }) => {
                            if let Some(Token { tok: Tok::RParen, span }) = self.peek() {
                                let s = *span;
                                self.pos += 1;
                                break s;
                            }
                        }
                        Some(Token { tok: Tok::RParen, span }) => break span,
                        Some(t) => return Err(Diagnostic::error(t.span, "expected `,` or `)`")),
                        None => return Err(Diagnostic::error(self.eof_span(), "expected `)`")),
                    }
                }
                _ => return Err(Diagnostic::error(t.span, "expected keyword argument")),
            }
        };
        Ok(Spanned {
            value: Value::Call { name, kwargs },
            span: join(name_span, end),
        })
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

enum Header {
    Object(String),
    Category(String),
    Part(usize, String),
    Other,
}

fn classify_comment(text: &str, span: Span) -> PResult<Header> {
    let t = text.trim();
    let ident = |rest: &str, what: &str| -> PResult<String> {
        let name = rest.trim();
        if is_ident(name) {
            Ok(name.to_string())
        } else {
            Err(Diagnostic::error(span, format!("{what} name `{name}` is not an identifier")))
        }
    };
    if let Some(rest) = t.strip_prefix("object:") {
        return Ok(Header::Object(ident(rest, "object")?));
    }
    if let Some(rest) = t.strip_prefix("category:") {
        return Ok(Header::Category(ident(rest, "category")?));
    }
    if let Some(rest) = t.strip_prefix("part_") {
        if let Some((idx, name)) = rest.split_once(':') {
            if !idx.is_empty() && idx.chars().all(|c| c.is_ascii_digit()) {
                let index: usize = idx
                    .parse()
                    .map_err(|_| Diagnostic::error(span, "part index out of range"))?;
                return Ok(Header::Part(index, ident(name, "part")?));
            }
        }
    }
    Ok(Header::Other)
}

/// Parses and validates program text.
pub fn parse_program(text: &str) -> Result<ShapeProgram, DslError> {
    let (program, spans) = parse_unvalidated(text)?;
    let mut errors: Vec<Diagnostic> = validate_program(&program)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        return Ok(program);
    }
    for d in &mut errors {
        if let Some(i) = d.part {
            if let Some(s) = spans.get(i) {
                d.span = *s;
            }
        }
    }
    Err(DslError::Validation(errors))
}

/// Syntax-only parse. Returns the program and the span of each part's
/// statement.
pub fn parse_unvalidated(text: &str) -> Result<(ShapeProgram, Vec<Span>), DslError> {
    let toks = tokenize(text).map_err(DslError::Parse)?;
    let mut p = Parser { toks, pos: 0 };
    let mut program: Option<ShapeProgram> = None;
    let mut pending: Option<(usize, String, Span)> = None;
    let mut spans = Vec::new();
    while let Some(t) = p.next() {
        match t.tok {
            Tok::Comment(ref text) => {
                let header = classify_comment(text, t.span).map_err(DslError::Parse)?;
                match (header, program.as_mut()) {
                    (Header::Object(name), None) => program = Some(ShapeProgram::new(name, "")),
                    (Header::Object(_), Some(_)) => {
                        return Err(DslError::Parse(Diagnostic::error(t.span, "duplicate object header")))
                    }
                    (Header::Other, _) => {}
                    (_, None) => {
                        return Err(DslError::Parse(Diagnostic::error(
                            t.span,
                            "expected `# object: NAME` header first",
                        )))
                    }
                    (Header::Category(c), Some(prog)) => {
                        if !prog.parts.is_empty() || pending.is_some() || !prog.object_category.is_empty() {
                            return Err(DslError::Parse(Diagnostic::error(
                                t.span,
                                "category header must directly follow the object header",
                            )));
                        }
                        prog.object_category = c;
                    }
                    (Header::Part(index, name), Some(_)) => {
                        if pending.is_some() {
                            return Err(DslError::Parse(Diagnostic::error(
                                t.span,
                                "part header without a statement",
                            )));
                        }
                        pending = Some((index, name, t.span));
                    }
                }
            }
            Tok::Ident(name) => {
                let Some(prog) = program.as_mut() else {
                    return Err(DslError::Parse(Diagnostic::error(
                        t.span,
                        "expected `# object: NAME` header first",
                    )));
                };
                let Some((index, part_name, _)) = pending.take() else {
                    return Err(DslError::Parse(Diagnostic::error(
                        t.span,
                        "statement without a `# part_N: NAME` header",
                    )));
                };
                let stmt = p.call_rest(name, t.span).map_err(DslError::Parse)?;
                let span = stmt.span;
                let shape = lower_shape(stmt).map_err(DslError::Parse)?;
                prog.parts.push(PartStatement {
                    name: part_name,
                    index,
                    shape,
                });
                spans.push(span);
            }
            _ => {
                return Err(DslError::Parse(Diagnostic::error(t.span, "expected a statement or comment")));
            }
        }
    }
    if let Some((_, _, span)) = pending {
        return Err(DslError::Parse(Diagnostic::error(span, "part header without a statement")));
    }
    let program = program.ok_or_else(|| {
        DslError::Parse(Diagnostic::error(Span::default(), "expected `# object: NAME` header first"))
    })?;
    Ok((program, spans))
}

/// Parses a single statement (no headers).
pub fn parse_shape(text: &str) -> Result<Shape, DslError> {
    let toks = tokenize(text).map_err(DslError::Parse)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p
        .next()
        .ok_or_else(|| DslError::Parse(Diagnostic::error(Span::default(), "empty statement")))?;
    let Tok::Ident(name) = t.tok else {
        return Err(DslError::Parse(Diagnostic::error(t.span, "expected a statement")));
    };
    let stmt = p.call_rest(name, t.span).map_err(DslError::Parse)?;
    if let Some(extra) = p.next() {
        return Err(DslError::Parse(Diagnostic::error(extra.span, "trailing input after statement")));
    }
    lower_shape(stmt).map_err(DslError::Parse)
}

// ---------------------------------------------------------------------------
// lowering

struct Kwargs {
    fname: String,
    span: Span,
    items: Vec<(String, Span, Option<Spanned>)>,
}

impl Kwargs {
    fn from_call(v: Spanned, expected: Option<&str>) -> PResult<Kwargs> {
        match v.value {
            Value::Call { name, kwargs } => {
                if let Some(e) = expected {
                    if name != e {
                        return Err(Diagnostic::error(v.span, format!("expected `{e}(...)`, found `{name}`")));
                    }
                }
                Ok(Kwargs {
                    fname: name,
                    span: v.span,
                    items: kwargs.into_iter().map(|(k, s, v)| (k, s, Some(v))).collect(),
                })
            }
            _ => Err(Diagnostic::error(v.span, "expected a call")),
        }
    }

    fn take(&mut self, key: &str) -> Option<Spanned> {
        self.items.iter_mut().find(|(k, _, _)| k == key).and_then(|(_, _, v)| v.take())
    }

    fn req(&mut self, key: &str) -> PResult<Spanned> {
        self.take(key).ok_or_else(|| {
            Diagnostic::error(self.span, format!("`{}` requires keyword argument `{key}`", self.fname))
        })
    }

    fn finish(self) -> PResult<()> {
        if let Some((k, s, _)) = self.items.iter().find(|(_, _, v)| v.is_some()) {
            return Err(Diagnostic::error(*s, format!("unknown keyword argument `{k}` for `{}`", self.fname)));
        }
        Ok(())
    }

    fn f64(&mut self, key: &str) -> PResult<f64> {
        as_f64(&self.req(key)?)
    }

    fn u32_or(&mut self, key: &str, default: u32) -> PResult<u32> {
        match self.take(key) {
            Some(v) => as_u32(&v),
            None => Ok(default),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> PResult<bool> {
        match self.take(key) {
            Some(v) => as_bool(&v),
            None => Ok(default),
        }
    }

    fn transform(&mut self) -> PResult<SimilarityTransform> {
        let mut t = SimilarityTransform::identity();
        if let Some(v) = self.take("location") {
            t.location = as_vec3(&v)?;
        }
        if let Some(v) = self.take("rotation") {
            let xs = as_tuple_n(&v, 4)?;
            t.rotation = [xs[0], xs[1], xs[2], xs[3]];
        }
        if let Some(v) = self.take("scale") {
            t.scale = as_vec3(&v)?;
        }
        Ok(t)
    }
}

fn as_f64(v: &Spanned) -> PResult<f64> {
    match v.value {
        Value::Number { value, .. } => Ok(value),
        _ => Err(Diagnostic::error(v.span, "expected a number")),
    }
}

fn as_u32(v: &Spanned) -> PResult<u32> {
    match v.value {
        Value::Number { value, is_int: true } if (0.0..=u32::MAX as f64).contains(&value) => Ok(value as u32),
        _ => Err(Diagnostic::error(v.span, "expected a non-negative integer")),
    }
}

fn as_bool(v: &Spanned) -> PResult<bool> {
    match v.value {
        Value::Bool(b) => Ok(b),
        _ => Err(Diagnostic::error(v.span, "expected `True` or `False`")),
    }
}

fn as_str(v: &Spanned) -> PResult<&str> {
    match &v.value {
        Value::Str(s) => Ok(s),
        _ => Err(Diagnostic::error(v.span, "expected a string")),
    }
}

fn as_tuple_n(v: &Spanned, n: usize) -> PResult<Vec<f64>> {
    match &v.value {
        Value::Tuple(items) if items.len() == n => items.iter().map(as_f64).collect(),
        _ => Err(Diagnostic::error(v.span, format!("expected a tuple of {n} numbers"))),
    }
}

fn as_vec3(v: &Spanned) -> PResult<Vec3> {
    let xs = as_tuple_n(v, 3)?;
    Ok(Vec3::new(xs[0], xs[1], xs[2]))
}

fn as_pt3(v: &Spanned) -> PResult<Point3> {
    Ok(Point3::from(as_vec3(v)?))
}

fn as_pt2(v: &Spanned) -> PResult<Point2> {
    let xs = as_tuple_n(v, 2)?;
    Ok(Point2::new(xs[0], xs[1]))
}

fn as_list(v: Spanned) -> PResult<Vec<Spanned>> {
    match v.value {
        Value::List(items) => Ok(items),
        _ => Err(Diagnostic::error(v.span, "expected a list")),
    }
}

fn list_of<T>(v: Spanned, f: impl Fn(&Spanned) -> PResult<T>) -> PResult<Vec<T>> {
    as_list(v)?.iter().map(f).collect()
}

fn kind_of(kw: &mut Kwargs) -> PResult<(String, Span)> {
    let v = kw.req("kind")?;
    Ok((as_str(&v)?.to_string(), v.span))
}

fn lower_shape(v: Spanned) -> PResult<Shape> {
    let name = match &v.value {
        Value::Call { name, .. } => name.clone(),
        _ => return Err(Diagnostic::error(v.span, "expected a shape statement")),
    };
    let span = v.span;
    let mut kw = Kwargs::from_call(v, None)?;
    let op = match name.as_str() {
        "create_primitive" => ShapeOp::Primitive(lower_primitive(&mut kw)?),
        "translation" => {
            let section = lower_section(kw.req("section")?, false)?.section;
            let trajectory = lower_trajectory(kw.req("trajectory")?)?;
            let profile = match kw.take("profile") {
                Some(v) => ScaleProfile {
                    keys: list_of(v, |e| {
                        let xs = as_tuple_n(e, 2)?;
                        Ok((xs[0], xs[1]))
                    })?,
                },
                None => ScaleProfile::constant(),
            };
            ShapeOp::Translation(Translation {
                section,
                trajectory,
                profile,
                section_resolution: kw.u32_or("section_resolution", 64)?,
                path_resolution: kw.u32_or("path_resolution", 64)?,
            })
        }
        "revolve" => {
            let section = lower_section(kw.req("section")?, false)?.section;
            let axis_origin = match kw.take("axis_origin") {
                Some(v) => as_pt2(&v)?,
                None => Point2::origin(),
            };
            let axis_direction = match kw.take("axis_direction") {
                Some(v) => as_pt2(&v)?.coords,
                None => Vec2::new(0.0, 1.0),
            };
            ShapeOp::Revolve(Revolve {
                section,
                axis_origin,
                axis_direction,
                sweep_angle: match kw.take("sweep_angle") {
                    Some(v) => as_f64(&v)?,
                    None => 360.0,
                },
                section_resolution: kw.u32_or("section_resolution", 64)?,
                steps: kw.u32_or("steps", 64)?,
            })
        }
        "bridge_loop" => {
            let loops = as_list(kw.req("loops")?)?
                .into_iter()
                .map(|v| lower_section(v, true))
                .collect::<PResult<Vec<_>>>()?;
            ShapeOp::BridgeLoop(BridgeLoop {
                loops,
                cap_start: kw.bool_or("cap_start", true)?,
                cap_end: kw.bool_or("cap_end", true)?,
                section_resolution: kw.u32_or("section_resolution", 32)?,
            })
        }
        "boolean" => {
            let opv = kw.req("operation")?;
            let operation = match as_str(&opv)? {
                "union" => BooleanKind::Union,
                "intersection" => BooleanKind::Intersection,
                "difference" => BooleanKind::Difference,
                other => return Err(Diagnostic::error(opv.span, format!("unknown boolean operation `{other}`"))),
            };
            let operands = as_list(kw.req("operands")?)?
                .into_iter()
                .map(lower_shape)
                .collect::<PResult<Vec<_>>>()?;
            ShapeOp::Boolean(BooleanOp { operation, operands })
        }
        "array_1d" => ShapeOp::Array1D(Array1D {
            proto: Box::new(lower_shape(kw.req("shape")?)?),
            trajectory: lower_trajectory(kw.req("trajectory")?)?,
            count: as_u32(&kw.req("count")?)?,
        }),
        "array_2d" => {
            let proto = Box::new(lower_shape(kw.req("shape")?)?);
            let u = as_vec3(&kw.req("u")?)?;
            let v = as_vec3(&kw.req("v")?)?;
            let cv = kw.req("counts")?;
            let counts = match &cv.value {
                Value::Tuple(items) if items.len() == 2 => (as_u32(&items[0])?, as_u32(&items[1])?),
                _ => return Err(Diagnostic::error(cv.span, "expected a tuple of 2 integers")),
            };
            let sp = as_tuple_n(&kw.req("spacings")?, 2)?;
            ShapeOp::Array2D(Array2D {
                proto,
                u,
                v,
                counts,
                spacings: (sp[0], sp[1]),
            })
        }
        "fill_grid" => ShapeOp::FillGrid(FillGrid {
            boundary: list_of(kw.req("boundary")?, as_pt3)?,
            thickness: kw.f64("thickness")?,
        }),
        other => return Err(Diagnostic::error(span, format!("unknown statement `{other}`"))),
    };
    let transform = kw.transform()?;
    kw.finish()?;
    Ok(Shape { op, transform })
}

fn lower_primitive(kw: &mut Kwargs) -> PResult<PrimitiveKind> {
    let (kind, kspan) = kind_of(kw)?;
    let default = PrimitiveKind::default_for(&kind)
        .ok_or_else(|| Diagnostic::error(kspan, format!("unknown primitive kind `{kind}`")))?;
    Ok(match default {
        PrimitiveKind::Cube => PrimitiveKind::Cube,
        PrimitiveKind::Cylinder { segments } => PrimitiveKind::Cylinder {
            segments: kw.u32_or("segments", segments)?,
        },
        PrimitiveKind::Cone { segments } => PrimitiveKind::Cone {
            segments: kw.u32_or("segments", segments)?,
        },
        PrimitiveKind::UvSphere { segments, rings } => PrimitiveKind::UvSphere {
            segments: kw.u32_or("segments", segments)?,
            rings: kw.u32_or("rings", rings)?,
        },
        PrimitiveKind::Torus {
            major_segments,
            minor_segments,
            minor_radius,
        } => PrimitiveKind::Torus {
            major_segments: kw.u32_or("major_segments", major_segments)?,
            minor_segments: kw.u32_or("minor_segments", minor_segments)?,
            minor_radius: match kw.take("minor_radius") {
                Some(v) => as_f64(&v)?,
                None => minor_radius,
            },
        },
    })
}

fn lower_section(v: Spanned, placed: bool) -> PResult<PlacedSection> {
    let mut kw = Kwargs::from_call(v, Some("create_curve"))?;
    let (kind, kspan) = kind_of(&mut kw)?;
    let section = match kind.as_str() {
        "rectangle" => SectionSpec::Rectangle {
            width: kw.f64("width")?,
            height: kw.f64("height")?,
        },
        "circle" => SectionSpec::Circle {
            radius: kw.f64("radius")?,
        },
        "arc" => SectionSpec::Arc {
            radius: kw.f64("radius")?,
            start_angle: kw.f64("start_angle")?,
            end_angle: kw.f64("end_angle")?,
            chord: kw.bool_or("chord", true)?,
        },
        "polygon" => SectionSpec::Polygon {
            points: list_of(kw.req("points")?, as_pt2)?,
        },
        "bezier" => SectionSpec::Bezier {
            points: list_of(kw.req("points")?, as_pt2)?,
            closed: kw.bool_or("closed", false)?,
        },
        other => return Err(Diagnostic::error(kspan, format!("unknown section kind `{other}`"))),
    };
    let transform = if placed {
        kw.transform()?
    } else {
        SimilarityTransform::identity()
    };
    kw.finish()?;
    Ok(PlacedSection { section, transform })
}

fn lower_trajectory(v: Spanned) -> PResult<TrajectorySpec> {
    let mut kw = Kwargs::from_call(v, Some("create_curve"))?;
    let (kind, kspan) = kind_of(&mut kw)?;
    let axis = |kw: &mut Kwargs| -> PResult<Vec3> {
        match kw.take("axis") {
            Some(v) => as_vec3(&v),
            None => Ok(Vec3::z()),
        }
    };
    let t = match kind.as_str() {
        "line" => TrajectorySpec::Line {
            start: as_pt3(&kw.req("start")?)?,
            end: as_pt3(&kw.req("end")?)?,
        },
        "polyline" => TrajectorySpec::Polyline {
            points: list_of(kw.req("points")?, as_pt3)?,
        },
        "circle" => TrajectorySpec::Circle {
            center: as_pt3(&kw.req("center")?)?,
            axis: axis(&mut kw)?,
            radius: kw.f64("radius")?,
        },
        "arc" => TrajectorySpec::Arc {
            center: as_pt3(&kw.req("center")?)?,
            axis: axis(&mut kw)?,
            radius: kw.f64("radius")?,
            start_angle: kw.f64("start_angle")?,
            end_angle: kw.f64("end_angle")?,
        },
        "rectangle" => TrajectorySpec::Rectangle {
            center: as_pt3(&kw.req("center")?)?,
            axis: axis(&mut kw)?,
            width: kw.f64("width")?,
            height: kw.f64("height")?,
        },
        "bezier" => TrajectorySpec::Bezier {
            points: list_of(kw.req("points")?, as_pt3)?,
        },
        other => return Err(Diagnostic::error(kspan, format!("unknown trajectory kind `{other}`"))),
    };
    kw.finish()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::print_program;

    const CUBE: &str = "# object: box\n# part_0: body\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n";

    #[test]
    fn minimal_cube_program() {
        let p = parse_program(CUBE).unwrap();
        assert_eq!(p.object_name, "box");
        assert_eq!(p.parts.len(), 1);
        assert_eq!(p.parts[0].name, "body");
        assert_eq!(p.parts[0].shape.op, ShapeOp::Primitive(PrimitiveKind::Cube));
        assert!(p.parts[0].shape.transform.is_identity());
        assert_eq!(print_program(&p), CUBE);
    }

    #[test]
    fn zero_scale_is_a_validation_error() {
        let src = CUBE.replace("scale=(1, 1, 1)", "scale=(0, 1, 1)");
        match parse_program(&src) {
            Err(DslError::Validation(d)) => {
                assert_eq!(d.len(), 1);
                assert!(d[0].message.contains("scale components > 0"), "{}", d[0].message);
                assert_eq!(d[0].span.start.line, 3);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let src = "# object: box\n# part_0: body\ncreate_primitive(kind=\"cube\" location=(0, 0, 0))\n";
        match parse_program(src) {
            Err(DslError::Parse(d)) => {
                assert_eq!(d.span.start.line, 3);
                assert_eq!(d.span.start.column, 30);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_and_duplicate_kwargs() {
        assert!(parse_shape("create_primitive(kind=\"cube\", colour=1)").is_err());
        assert!(parse_shape("create_primitive(kind=\"cube\", kind=\"cube\")").is_err());
        assert!(parse_shape("create_primitive(kind=\"blob\")").is_err());
        assert!(parse_shape("create_primitive(kind=\"cylinder\", segments=3.5)").is_err());
    }

    #[test]
    fn statement_needs_part_header() {
        let src = "# object: box\ncreate_primitive(kind=\"cube\")\n";
        assert!(matches!(parse_program(src), Err(DslError::Parse(_))));
        assert!(matches!(parse_program("create_primitive(kind=\"cube\")"), Err(DslError::Parse(_))));
    }

    #[test]
    fn category_and_free_comments() {
        let src = "# object: chair\n# category: seating\n# a free comment\n# part_0: seat\ncreate_primitive(kind=\"cube\")\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.object_category, "seating");
        assert_eq!(p.parts.len(), 1);
    }

    #[test]
    fn nested_statements_parse() {
        let src = "# object: o\n# part_0: p\nboolean(operation=\"difference\", operands=[create_primitive(kind=\"cube\"), create_primitive(kind=\"uv_sphere\", segments=16, rings=8, scale=(1.2, 1.2, 1.2))])\n";
        let p = parse_program(src).unwrap();
        let ShapeOp::Boolean(b) = &p.parts[0].shape.op else { panic!() };
        assert_eq!(b.operands.len(), 2);
        assert_eq!(b.operation, BooleanKind::Difference);
        let again = parse_program(&print_program(&p)).unwrap();
        assert_eq!(again, p);
    }
}
