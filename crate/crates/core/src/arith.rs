//! Number systems the kernels are generic over.
//!
//! An [`Arithmetic`] owns the format and modes of one run; every variable
//! and constant of a kernel goes through it, so swapping the system swaps
//! all arithmetic at once.

use std::cell::Cell;
use std::fmt;
use std::marker::PhantomData;
use std::rc::Rc;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::flp::{flp_add, flp_mul, flp_sub, FlPFormat, FlPValue};
use crate::fxp::{
    encode, encode_f64, fxp_add_sub, fxp_mul_into, AddSub, FxPValue, OverflowMode, QFormat, Quantized, RoundingModeFxp,
};
use crate::rational;
use crate::Rational;

// encoding needs the number system's format, hence `&self` constructors
#[allow(clippy::wrong_self_convention)]
pub trait Arithmetic {
    type Value: Clone + fmt::Debug;

    fn from_f64(&self, x: f64) -> Self::Value;
    fn from_rational(&self, x: &Rational) -> Self::Value;
    fn to_f64(&self, v: &Self::Value) -> f64;
    fn to_rational(&self, v: &Self::Value) -> Rational;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn less_than(&self, a: &Self::Value, b: &Self::Value) -> bool;

    fn zero(&self) -> Self::Value {
        self.from_f64(0.0)
    }

    /// Same system with `bits` more integer bits and as many fewer
    /// fractional bits. Systems without a fixed binary point return a copy.
    fn with_headroom(&self, bits: i32) -> Self
    where
        Self: Sized;

    fn label(&self) -> String;
}

/// Native binary floating point, used as the golden reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct Golden<F>(PhantomData<F>);

impl<F> Golden<F> {
    pub fn new() -> Self {
        Self(PhantomData)
    }
}

impl<F: Float + fmt::Debug> Arithmetic for Golden<F> {
    type Value = F;

    fn from_f64(&self, x: f64) -> F {
        F::from(x).expect("finite input")
    }

    fn from_rational(&self, x: &Rational) -> F {
        self.from_f64(rational::to_f64(x))
    }

    fn to_f64(&self, v: &F) -> f64 {
        v.to_f64().expect("float converts to f64")
    }

    fn to_rational(&self, v: &F) -> Rational {
        rational::from_f64(self.to_f64(v)).expect("finite value")
    }

    fn add(&self, a: &F, b: &F) -> F {
        *a + *b
    }

    fn sub(&self, a: &F, b: &F) -> F {
        *a - *b
    }

    fn mul(&self, a: &F, b: &F) -> F {
        *a * *b
    }

    fn less_than(&self, a: &F, b: &F) -> bool {
        a < b
    }

    fn with_headroom(&self, _bits: i32) -> Self {
        *self
    }

    fn label(&self) -> String {
        format!("f{}", std::mem::size_of::<F>() * 8)
    }
}

/// Fixed point: every result is rounded and overflow-handled into `fmt`.
#[derive(Debug, Clone)]
pub struct Fixed {
    pub fmt: QFormat,
    pub rounding: RoundingModeFxp,
    pub overflow: OverflowMode,
    events: Cell<u64>,
}

impl Fixed {
    pub fn new(fmt: QFormat, rounding: RoundingModeFxp, overflow: OverflowMode) -> Self {
        Self { fmt, rounding, overflow, events: Cell::new(0) }
    }

    /// Number of results that needed overflow handling so far.
    pub fn overflow_events(&self) -> u64 {
        self.events.get()
    }

    fn track(&self, q: Quantized) -> FxPValue {
        if q.overflow {
            self.events.set(self.events.get() + 1);
        }
        q.value
    }
}

impl Arithmetic for Fixed {
    type Value = FxPValue;

    fn from_f64(&self, x: f64) -> FxPValue {
        self.track(encode_f64(x, self.fmt, self.rounding, self.overflow))
    }

    fn from_rational(&self, x: &Rational) -> FxPValue {
        self.track(encode(x, self.fmt, self.rounding, self.overflow))
    }

    fn to_f64(&self, v: &FxPValue) -> f64 {
        v.to_f64()
    }

    fn to_rational(&self, v: &FxPValue) -> Rational {
        v.to_rational()
    }

    fn add(&self, a: &FxPValue, b: &FxPValue) -> FxPValue {
        self.track(fxp_add_sub(a, b, AddSub::Add, self.fmt, self.rounding, self.overflow))
    }

    fn sub(&self, a: &FxPValue, b: &FxPValue) -> FxPValue {
        self.track(fxp_add_sub(a, b, AddSub::Sub, self.fmt, self.rounding, self.overflow))
    }

    fn mul(&self, a: &FxPValue, b: &FxPValue) -> FxPValue {
        self.track(fxp_mul_into(a, b, self.fmt, self.rounding, self.overflow))
    }

    fn less_than(&self, a: &FxPValue, b: &FxPValue) -> bool {
        if a.format() == b.format() {
            a.raw() < b.raw()
        } else {
            a.to_rational() < b.to_rational()
        }
    }

    fn with_headroom(&self, bits: i32) -> Self {
        let fmt = QFormat::new(self.fmt.m + bits, self.fmt.n - bits).expect("same total width");
        Self::new(fmt, self.rounding, self.overflow)
    }

    fn label(&self) -> String {
        NumericConfig::Fixed { fmt: self.fmt, rounding: self.rounding, overflow: self.overflow }.to_string()
    }
}

/// Reduced-precision floating point with a single format.
#[derive(Debug, Clone, Copy)]
pub struct Minifloat {
    pub fmt: FlPFormat,
}

impl Minifloat {
    pub fn new(fmt: FlPFormat) -> Self {
        Self { fmt }
    }
}

impl Arithmetic for Minifloat {
    type Value = FlPValue;

    fn from_f64(&self, x: f64) -> FlPValue {
        FlPValue::from_f64(x, self.fmt)
    }

    fn from_rational(&self, x: &Rational) -> FlPValue {
        crate::flp::encode_real(x, self.fmt)
    }

    fn to_f64(&self, v: &FlPValue) -> f64 {
        v.to_f64()
    }

    fn to_rational(&self, v: &FlPValue) -> Rational {
        v.decode()
    }

    fn add(&self, a: &FlPValue, b: &FlPValue) -> FlPValue {
        flp_add(a, b, self.fmt).expect("operands share the run format")
    }

    fn sub(&self, a: &FlPValue, b: &FlPValue) -> FlPValue {
        flp_sub(a, b, self.fmt).expect("operands share the run format")
    }

    fn mul(&self, a: &FlPValue, b: &FlPValue) -> FlPValue {
        flp_mul(a, b, self.fmt).expect("operands share the run format")
    }

    fn less_than(&self, a: &FlPValue, b: &FlPValue) -> bool {
        a < b
    }

    fn with_headroom(&self, _bits: i32) -> Self {
        *self
    }

    fn label(&self) -> String {
        self.fmt.to_string()
    }
}

/// Operation tallies shared by a [`Counting`] system and its headroom copies.
#[derive(Debug, Default)]
pub struct OpCounts {
    pub adds: Cell<u64>,
    pub subs: Cell<u64>,
    pub muls: Cell<u64>,
    pub encodes: Cell<u64>,
}

fn bump(c: &Cell<u64>) {
    c.set(c.get() + 1);
}

/// Counts every operation before delegating to `inner`.
#[derive(Debug, Clone)]
pub struct Counting<A> {
    pub inner: A,
    pub counts: Rc<OpCounts>,
}

impl<A> Counting<A> {
    pub fn new(inner: A) -> Self {
        Self { inner, counts: Rc::default() }
    }
}

impl<A: Arithmetic> Arithmetic for Counting<A> {
    type Value = A::Value;

    fn from_f64(&self, x: f64) -> A::Value {
        bump(&self.counts.encodes);
        self.inner.from_f64(x)
    }

    fn from_rational(&self, x: &Rational) -> A::Value {
        bump(&self.counts.encodes);
        self.inner.from_rational(x)
    }

    fn to_f64(&self, v: &A::Value) -> f64 {
        self.inner.to_f64(v)
    }

    fn to_rational(&self, v: &A::Value) -> Rational {
        self.inner.to_rational(v)
    }

    fn add(&self, a: &A::Value, b: &A::Value) -> A::Value {
        bump(&self.counts.adds);
        self.inner.add(a, b)
    }

    fn sub(&self, a: &A::Value, b: &A::Value) -> A::Value {
        bump(&self.counts.subs);
        self.inner.sub(a, b)
    }

    fn mul(&self, a: &A::Value, b: &A::Value) -> A::Value {
        bump(&self.counts.muls);
        self.inner.mul(a, b)
    }

    fn less_than(&self, a: &A::Value, b: &A::Value) -> bool {
        self.inner.less_than(a, b)
    }

    fn zero(&self) -> A::Value {
        self.inner.zero()
    }

    fn with_headroom(&self, bits: i32) -> Self {
        Self { inner: self.inner.with_headroom(bits), counts: Rc::clone(&self.counts) }
    }

    fn label(&self) -> String {
        self.inner.label()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse numeric configuration `{0}`")]
pub struct ParseConfigError(pub String);

/// The number system of one experiment run.
///
/// Textual forms: `golden`, `flt<E,M,RN|RZ[,bias]>`, and `Qm.n` optionally
/// followed by `/rounding/overflow` (e.g. `Q3.5/rne/wrap`). A bare `Qm.n`
/// means truncation with saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NumericConfig {
    Fixed { fmt: QFormat, rounding: RoundingModeFxp, overflow: OverflowMode },
    Float(FlPFormat),
    Golden,
}

impl NumericConfig {
    pub const DEFAULT_ROUNDING: RoundingModeFxp = RoundingModeFxp::Truncate;
    pub const DEFAULT_OVERFLOW: OverflowMode = OverflowMode::Saturate;

    pub fn fixed(fmt: QFormat) -> Self {
        Self::Fixed { fmt, rounding: Self::DEFAULT_ROUNDING, overflow: Self::DEFAULT_OVERFLOW }
    }

    /// Total storage width; `None` for the golden reference.
    pub fn width(&self) -> Option<u32> {
        match self {
            Self::Fixed { fmt, .. } => Some(fmt.width() as u32),
            Self::Float(f) => Some(f.width()),
            Self::Golden => None,
        }
    }
}

impl fmt::Display for NumericConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Golden => write!(f, "golden"),
            Self::Float(x) => write!(f, "{x}"),
            Self::Fixed { fmt, rounding, overflow } => {
                write!(f, "{fmt}")?;
                if *rounding != Self::DEFAULT_ROUNDING || *overflow != Self::DEFAULT_OVERFLOW {
                    write!(f, "/{}/{}", rounding.short_name(), overflow.short_name())?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for NumericConfig {
    type Err = ParseConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseConfigError(s.to_string());
        let t = s.trim();
        if t.eq_ignore_ascii_case("golden") || t == "f64" {
            return Ok(Self::Golden);
        }
        if t.starts_with("flt<") {
            return t.parse().map(Self::Float).map_err(|_| err());
        }
        let mut parts = t.split('/');
        let fmt: QFormat = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let rounding = match parts.next() {
            Some(r) => r.parse().map_err(|_| err())?,
            None => Self::DEFAULT_ROUNDING,
        };
        let overflow = match parts.next() {
            Some(o) => o.parse().map_err(|_| err())?,
            None => Self::DEFAULT_OVERFLOW,
        };
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(Self::Fixed { fmt, rounding, overflow })
    }
}

impl Serialize for NumericConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NumericConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
