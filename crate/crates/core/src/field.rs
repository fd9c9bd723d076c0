//! Scalar fields on R^d: the common interface for estimators, true densities and test functions.

use crate::grid::{GridPoints, GridSpec};

pub trait ScalarField: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Values at every grid node or center, axis 0 fastest.
    fn sample_grid(&self, grid: &GridSpec, at: GridPoints) -> Vec<f64> {
        let mut p = vec![0.0; grid.dim()];
        (0..grid.len(at))
            .map(|k| {
                grid.point(k, at, &mut p);
                self.value(&p)
            })
            .collect()
    }
}

pub trait GradientField: ScalarField {
    /// Writes the gradient into `grad` and returns the value.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn sample_grid(&self, grid: &GridSpec, at: GridPoints) -> Vec<f64> {
        (**self).sample_grid(grid, at)
    }
}

impl<T: GradientField + ?Sized> GradientField for &T {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
}

/// Adapts a closure `x -> f(x)`.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Adapts a value closure and a gradient closure.
pub struct FnGradientField<F, G> {
    dim: usize,
    f: F,
    g: G,
}

impl<F, G> FnGradientField<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F, g: G) -> Self {
        Self { dim, f, g }
    }
}

impl<F, G> ScalarField for FnGradientField<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl<F, G> GradientField for FnGradientField<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (self.g)(x, grad);
        (self.f)(x)
    }
}

/// `F + offset`, handy for shifting a level.
pub struct Shifted<T> {
    pub inner: T,
    pub offset: f64,
}

impl<T: ScalarField> ScalarField for Shifted<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) + self.offset
    }
}

impl<T: GradientField> GradientField for Shifted<T> {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.inner.value_and_gradient(x, grad) + self.offset
    }
}
