use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

static NEXT_SET_ID: AtomicU64 = AtomicU64::new(1);

/// Index of a parameter inside its [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

#[derive(Clone, Debug)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Tensor<T>,
    /// `None` until the first backward pass or `zero_grad`.
    pub grad: Option<Tensor<T>>,
}

/// Named trainable tensors of one network.
///
/// Every set carries a process-unique id so a [`crate::Tape`] can tell which
/// network a parameter leaf belongs to.
#[derive(Debug)]
pub struct ParamSet<T> {
    uid: u64,
    params: Vec<Parameter<T>>,
    by_name: HashMap<String, ParamId>,
}

impl<T: Scalar> Default for ParamSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Clone for ParamSet<T> {
    fn clone(&self) -> Self {
        Self {
            uid: NEXT_SET_ID.fetch_add(1, Ordering::Relaxed),
            params: self.params.clone(),
            by_name: self.by_name.clone(),
        }
    }
}

impl<T: Scalar> ParamSet<T> {
    pub fn new() -> Self {
        Self {
            uid: NEXT_SET_ID.fetch_add(1, Ordering::Relaxed),
            params: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<T>) -> Result<ParamId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(CoreError::contract(
                "ParamSet::add",
                format!("duplicate parameter name {name:?}"),
            ));
        }
        let id = ParamId(self.params.len());
        self.by_name.insert(name.clone(), id);
        self.params.push(Parameter {
            name,
            value,
            grad: None,
        });
        Ok(id)
    }

    pub fn get(&self, id: ParamId) -> &Parameter<T> {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter<T> {
        &mut self.params[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter<T>> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter<T>> {
        self.params.iter_mut()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            match p.grad.as_mut() {
                Some(g) => g.data_mut().fill(T::zero()),
                None => p.grad = Some(Tensor::zeros(p.value.shape().to_vec()).expect("valid shape")),
            }
        }
    }

    pub(crate) fn accumulate(&mut self, id: ParamId, grad: &[T]) {
        let p = &mut self.params[id.0];
        let g = p
            .grad
            .get_or_insert_with(|| Tensor::zeros(p.value.shape().to_vec()).expect("valid shape"));
        for (a, &b) in g.data_mut().iter_mut().zip(grad) {
            *a += b;
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.numel()).sum()
    }

    /// Euclidean distance between the values of two sets with equal layout.
    pub fn distance(&self, other: &ParamSet<T>) -> T {
        self.params
            .iter()
            .zip(&other.params)
            .flat_map(|(a, b)| a.value.data().iter().zip(b.value.data()))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.value.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut ps = ParamSet::<f32>::new();
        ps.add("a.weight", Tensor::zeros([1]).unwrap()).unwrap();
        assert!(ps.add("a.weight", Tensor::zeros([1]).unwrap()).is_err());
        assert_eq!(ps.find("a.weight"), Some(ParamId(0)));
    }

    #[test]
    fn clones_get_fresh_identity() {
        let ps = ParamSet::<f32>::new();
        assert_ne!(ps.uid(), ps.clone().uid());
    }
}
