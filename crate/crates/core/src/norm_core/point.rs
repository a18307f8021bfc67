use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::space::{Shape, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An element of a [`SpaceDescriptor`]'s space (or of its dual, which has
/// the same layout).
#[derive(Debug, Clone, PartialEq)]
pub enum Point<T: Scalar> {
    Vector(DVector<T>),
    Matrix(DMatrix<T>),
    Block(Vec<Point<T>>),
}

impl<T: Scalar> Point<T> {
    pub fn vector(values: impl IntoIterator<Item = T>) -> Self {
        let v: Vec<T> = values.into_iter().collect();
        Point::Vector(DVector::from_vec(v))
    }

    /// Builds an `m×n` matrix point from row-major values.
    pub fn matrix_row_major(m: usize, n: usize, values: &[T]) -> Self {
        Point::Matrix(DMatrix::from_row_slice(m, n, values))
    }

    pub fn zeros(shape: &Shape) -> Self {
        match shape {
            Shape::Vector(n) => Point::Vector(DVector::zeros(*n)),
            Shape::Matrix(m, n) => Point::Matrix(DMatrix::zeros(*m, *n)),
            Shape::Block(children) => Point::Block(children.iter().map(Point::zeros).collect()),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Point::Vector(v) => Shape::Vector(v.len()),
            Point::Matrix(m) => Shape::Matrix(m.nrows(), m.ncols()),
            Point::Block(children) => Shape::Block(children.iter().map(Point::shape).collect()),
        }
    }

    /// Errors unless the point's layout equals the descriptor's.
    pub fn check_shape(&self, space: &SpaceDescriptor) -> Result<()> {
        let expected = space.shape();
        let found = self.shape();
        if expected == found {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { expected: expected.to_string(), found: found.to_string() })
        }
    }

    /// Flattened coordinates: vectors in order, matrices row-major, blocks concatenated.
    pub fn coords(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.push_coords(&mut out);
        out
    }

    fn push_coords(&self, out: &mut Vec<T>) {
        match self {
            Point::Vector(v) => out.extend(v.iter().copied()),
            Point::Matrix(m) => {
                for i in 0..m.nrows() {
                    out.extend(m.row(i).iter().copied());
                }
            }
            Point::Block(children) => children.iter().for_each(|c| c.push_coords(out)),
        }
    }

    /// Rebuilds a point of the given shape from flattened coordinates.
    pub fn from_coords(shape: &Shape, coords: &[T]) -> Result<Self> {
        let mut it = coords.iter().copied();
        let p = Self::take_coords(shape, &mut it)?;
        if it.next().is_some() {
            return Err(Error::ShapeMismatch {
                expected: shape.to_string(),
                found: format!("{} coordinates", coords.len()),
            });
        }
        Ok(p)
    }

    fn take_coords(shape: &Shape, it: &mut impl Iterator<Item = T>) -> Result<Self> {
        let mut grab = |k: usize| -> Result<Vec<T>> {
            let v: Vec<T> = it.by_ref().take(k).collect();
            if v.len() == k {
                Ok(v)
            } else {
                Err(Error::ShapeMismatch { expected: shape.to_string(), found: "too few coordinates".into() })
            }
        };
        Ok(match shape {
            Shape::Vector(n) => Point::Vector(DVector::from_vec(grab(*n)?)),
            Shape::Matrix(m, n) => Point::Matrix(DMatrix::from_row_slice(*m, *n, &grab(m * n)?)),
            Shape::Block(children) => {
                let mut out = Vec::with_capacity(children.len());
                for c in children {
                    out.push(Self::take_coords(c, it)?);
                }
                Point::Block(out)
            }
        })
    }

    fn zip_with(&self, other: &Self, f: &impl Fn(T, T) -> T) -> Self {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) => Point::Vector(a.zip_map(b, f)),
            (Point::Matrix(a), Point::Matrix(b)) => Point::Matrix(a.zip_map(b, f)),
            (Point::Block(a), Point::Block(b)) => Point::Block(a.iter().zip(b).map(|(x, y)| x.zip_with(y, f)).collect()),
            _ => panic!("point layouts differ"),
        }
    }

    pub fn map(&self, f: &impl Fn(T) -> T) -> Self {
        match self {
            Point::Vector(a) => Point::Vector(a.map(f)),
            Point::Matrix(a) => Point::Matrix(a.map(f)),
            Point::Block(a) => Point::Block(a.iter().map(|x| x.map(f)).collect()),
        }
    }

    /// `self + other`. Panics when layouts differ.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, &|a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, &|a, b| a - b)
    }

    pub fn scale(&self, t: T) -> Self {
        self.map(&|a| a * t)
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: T, other: &Self) -> Self {
        self.zip_with(other, &|a, b| a + t * b)
    }

    /// Pairing `⟨ξ, x⟩`: coordinatewise dot product (Frobenius for matrices).
    pub fn dot(&self, other: &Self) -> T {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) => a.dot(b),
            (Point::Matrix(a), Point::Matrix(b)) => a.dot(b),
            (Point::Block(a), Point::Block(b)) => a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.dot(y)),
            _ => panic!("point layouts differ"),
        }
    }

    pub fn max_abs(&self) -> T {
        self.coords().into_iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coords().into_iter().all(|x| x == T::zero())
    }

    pub fn as_vector(&self) -> Option<&DVector<T>> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<T>> {
        match self {
            Point::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

/// Writes a point in the plain numeric text format.
///
/// Vectors are one line of whitespace-separated decimals. Matrices start with
/// an `m n` header line followed by one line per row. Block points write
/// their children one after another.
pub fn write_point<T: Scalar>(point: &Point<T>) -> String {
    let mut out = String::new();
    write_into(point, &mut out);
    out
}

fn write_into<T: Scalar>(point: &Point<T>, out: &mut String) {
    match point {
        Point::Vector(v) => {
            let line: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        Point::Matrix(m) => {
            let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
            for i in 0..m.nrows() {
                let line: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        Point::Block(children) => children.iter().for_each(|c| write_into(c, out)),
    }
}

/// Reads a point of `space` from the plain numeric text format.
pub fn read_point(space: &SpaceDescriptor, text: &str) -> Result<Point<f64>> {
    let mut tokens = text.split_whitespace();
    let p = read_shape(&space.shape(), &mut tokens)?;
    if let Some(extra) = tokens.next() {
        return Err(Error::Parse(format!("trailing token '{extra}' after point")));
    }
    Ok(p)
}

fn next_number<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<f64> {
    let tok = tokens.next().ok_or_else(|| Error::Parse("unexpected end of point data".into()))?;
    let x: f64 = tok.parse().map_err(|_| Error::Parse(format!("bad number '{tok}'")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite coordinate '{tok}'")));
    }
    Ok(x)
}

fn read_shape<'a>(shape: &Shape, tokens: &mut impl Iterator<Item = &'a str>) -> Result<Point<f64>> {
    match shape {
        Shape::Vector(n) => {
            let v = (0..*n).map(|_| next_number(tokens)).collect::<Result<Vec<_>>>()?;
            Ok(Point::Vector(DVector::from_vec(v)))
        }
        Shape::Matrix(m, n) => {
            let hm = next_number(tokens)?;
            let hn = next_number(tokens)?;
            if hm != *m as f64 || hn != *n as f64 {
                return Err(Error::ShapeMismatch { expected: shape.to_string(), found: format!("matrix header {hm} {hn}") });
            }
            let v = (0..m * n).map(|_| next_number(tokens)).collect::<Result<Vec<_>>>()?;
            Ok(Point::Matrix(DMatrix::from_row_slice(*m, *n, &v)))
        }
        Shape::Block(children) => children.iter().map(|c| read_shape(c, tokens)).collect::<Result<Vec<_>>>().map(Point::Block),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrix_text_has_header() {
        let p = Point::matrix_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let text = write_point(&p);
        assert_eq!(text, "2 3\n1 2 3\n4 5 6\n");
        let space = SpaceDescriptor::schatten(2, 3, 2.0).unwrap();
        assert_eq!(read_point(&space, &text).unwrap(), p);
    }

    #[test]
    fn read_rejects_wrong_header_and_trailing_data() {
        let space = SpaceDescriptor::schatten(2, 2, 2.0).unwrap();
        assert!(read_point(&space, "2 3 1 2 3 4 5 6").is_err());
        let v = SpaceDescriptor::lp(2, 3.0).unwrap();
        assert!(read_point(&v, "1 2 3").is_err());
        assert!(read_point(&v, "1").is_err());
        assert!(read_point(&v, "1 nan").is_err());
    }

    proptest! {
        #[test]
        fn block_text_roundtrip(a in prop::collection::vec(-1e6f64..1e6, 3), b in prop::collection::vec(-1e6f64..1e6, 4)) {
            let space: SpaceDescriptor = "block:p=3[euclidean:n=3|schatten:m=2,n=2,p=4]".parse().unwrap();
            let p = Point::Block(vec![Point::vector(a), Point::matrix_row_major(2, 2, &b)]);
            let back = read_point(&space, &write_point(&p)).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
