use std::ops::{Add, Sub};

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated<T> {
    sum: T,
    carry: T,
}

pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for num_complex::Complex64 {
    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

impl<T> Compensated<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Magnitude,
{
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.magnitude() >= x.magnitude() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

pub fn compensated_sum<T, I>(it: I) -> T
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Magnitude,
    I: IntoIterator<Item = T>,
{
    let mut acc = Compensated::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}
