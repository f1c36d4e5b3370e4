use agegan_core::{Scalar, Tensor};
use rand::Rng;

use crate::error::Result;

pub const DEFAULT_POOL_SIZE: usize = 50;

/// History of generated fakes shown to a discriminator.
///
/// Until full, every fake is stored and returned as is. Once full, each fake
/// is returned unchanged with probability 0.5; otherwise a uniformly chosen
/// stored fake is returned and replaced by the new one.
#[derive(Clone, Debug)]
pub struct ImagePool<T: Scalar> {
    capacity: usize,
    items: Vec<Tensor<T>>,
}

impl<T: Scalar> ImagePool<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Exchange one sample.
    pub fn query_one(&mut self, fake: Tensor<T>, rng: &mut impl Rng) -> Tensor<T> {
        if self.capacity == 0 {
            return fake;
        }
        if self.items.len() < self.capacity {
            self.items.push(fake.clone());
            return fake;
        }
        if rng.random_bool(0.5) {
            let i = rng.random_range(0..self.items.len());
            std::mem::replace(&mut self.items[i], fake)
        } else {
            fake
        }
    }

    /// Exchange every item of an `N × …` batch.
    pub fn query(&mut self, batch: &Tensor<T>, rng: &mut impl Rng) -> Result<Tensor<T>> {
        let n = batch.shape()[0];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.query_one(batch.batch_item(i)?, rng));
        }
        Ok(Tensor::stack_batch(&out)?)
    }
}
