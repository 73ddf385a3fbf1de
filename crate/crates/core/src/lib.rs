//! Small-target detection in sea clutter with a false-alarm-rate-controlled
//! kernel SVM.
//!
//! The pipeline:
//!
//! 1. [`signal`]: load or synthesize range-cell I/Q data and cut each cell
//!    into overlapping amplitude windows.
//! 2. [`features`]: describe every window by its temporal information
//!    entropy, temporal Hurst exponent and frequency peak-to-average ratio.
//! 3. [`svm`]: train a soft-margin SVM with separate slack penalties for the
//!    clutter and target classes (SMO on the dual).
//! 4. [`far`]: bisect the clutter penalty until the training false alarm
//!    rate matches a requested value.
//! 5. [`eval`]: split, measure detection probability, sweep ROC points and
//!    compare against a Hurst-exponent threshold detector.

pub mod eval;
pub mod far;
pub mod features;
pub mod signal;
pub mod svm;
