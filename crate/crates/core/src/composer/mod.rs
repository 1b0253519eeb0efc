//! Declarative, distribution-parameterized soundscape composition.

mod distribution;
mod generate;
mod scene;

pub use distribution::{
    sample_distribution, sample_f64, sample_string, DistributionSpec,
};
pub use generate::{generate, generate_concrete, GenerateOutput};
pub use scene::{
    instantiate, BackgroundSpec, ConcreteBackground, ConcreteEvent, ConcreteScene, EventSpec,
    Placement, RoomModel, Sample, SceneSpec, TrajectorySpec,
};
