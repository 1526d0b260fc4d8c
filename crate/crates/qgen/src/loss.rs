use locavqg_core::Scalar;
use locavqg_nn::{log_softmax, softmax, Tensor};

use crate::error::{QgenError, Result};
use crate::tokenizer::PAD;

/// Value and student-logit gradient of the combined hard/soft objective.
#[derive(Debug, Clone)]
pub struct DistillLoss<T: Scalar> {
    pub loss: T,
    /// Mean cross-entropy against the targets.
    pub hard: T,
    /// Mean `temperature² · KL(teacher ‖ student)` on softened distributions.
    pub soft: T,
    /// Gradient of `loss` w.r.t. the student logits.
    pub grad: Tensor<T>,
    /// Number of non-padding positions averaged over.
    pub positions: usize,
}

/// `alpha · CE(student, target) + (1 − alpha) · T² · KL(softmax(t/T) ‖ softmax(s/T))`,
/// averaged over positions whose target is not `<pad>`.
///
/// Rows of `teacher_logits` are constants. Teacher probabilities that
/// underflow to zero contribute nothing to the KL term.
pub fn distillation_loss<T: Scalar>(
    student_logits: &Tensor<T>,
    teacher_logits: &Tensor<T>,
    targets: &[usize],
    alpha: f64,
    temperature: f64,
) -> Result<DistillLoss<T>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(QgenError::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(QgenError::InvalidConfig(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    if student_logits.shape() != teacher_logits.shape() {
        return Err(QgenError::Shape(format!(
            "student logits {:?} vs teacher logits {:?}",
            student_logits.shape(),
            teacher_logits.shape()
        )));
    }
    if targets.len() != student_logits.rows() {
        return Err(QgenError::Shape(format!(
            "{} targets for {} logit rows",
            targets.len(),
            student_logits.rows()
        )));
    }
    let vocab = student_logits.cols();
    if let Some(&bad) = targets.iter().find(|&&t| t >= vocab) {
        return Err(QgenError::Shape(format!("target id {bad} outside vocab {vocab}")));
    }

    let (rows, _) = student_logits.shape();
    let mut grad = Tensor::zeros(rows, vocab);
    let n = targets.iter().filter(|&&t| t != PAD).count();
    if n == 0 {
        return Ok(DistillLoss {
            loss: T::zero(),
            hard: T::zero(),
            soft: T::zero(),
            grad,
            positions: 0,
        });
    }

    let a = T::of(alpha);
    let one_minus_a = T::one() - a;
    let temp = T::of(temperature);
    let inv_temp = T::one() / temp;
    let inv_n = T::one() / T::of_usize(n);
    let mut hard = T::zero();
    let mut soft = T::zero();

    for (r, &y) in targets.iter().enumerate() {
        if y == PAD {
            continue;
        }
        let s = student_logits.row(r);
        let log_ps = log_softmax(s);
        hard -= log_ps[y];

        let s_t: Vec<T> = s.iter().map(|&x| x * inv_temp).collect();
        let t_t: Vec<T> = teacher_logits.row(r).iter().map(|&x| x * inv_temp).collect();
        let log_ps_t = log_softmax(&s_t);
        let log_pt_t = log_softmax(&t_t);
        let pt_t = softmax(&t_t);
        let mut kl = T::zero();
        for k in 0..vocab {
            if pt_t[k] > T::zero() {
                kl += pt_t[k] * (log_pt_t[k] - log_ps_t[k]);
            }
        }
        soft += temp * temp * kl;

        let g = grad.row_mut(r);
        for k in 0..vocab {
            let ps = log_ps[k].exp();
            let onehot = if k == y { T::one() } else { T::zero() };
            let hard_g = ps - onehot;
            let soft_g = temp * (log_ps_t[k].exp() - pt_t[k]);
            g[k] = inv_n * (a * hard_g + one_minus_a * soft_g);
        }
    }
    let hard = hard * inv_n;
    let soft = soft * inv_n;
    Ok(DistillLoss {
        loss: a * hard + one_minus_a * soft,
        hard,
        soft,
        grad,
        positions: n,
    })
}

/// Mean cross-entropy over non-padding positions, with its gradient.
pub fn cross_entropy<T: Scalar>(logits: &Tensor<T>, targets: &[usize]) -> Result<DistillLoss<T>> {
    distillation_loss(logits, logits, targets, 1.0, 1.0)
}
