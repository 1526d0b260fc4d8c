/// Anything that assigns an engagingness probability to a question.
///
/// Implemented by the trained classifiers and by test stubs; consumed by
/// dataset filtering and filtered inference.
pub trait EngagementScorer: Send + Sync {
    /// Probability in `[0, 1]` that `text` is engaging.
    fn score(&self, text: &str) -> f64;

    /// Identifier recorded in dataset headers and reports.
    fn id(&self) -> String;
}

impl<S: EngagementScorer + ?Sized> EngagementScorer for &S {
    fn score(&self, text: &str) -> f64 {
        (**self).score(text)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

impl<S: EngagementScorer + ?Sized> EngagementScorer for Box<S> {
    fn score(&self, text: &str) -> f64 {
        (**self).score(text)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}
