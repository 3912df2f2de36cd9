//! Software rendering of stimuli: rasterization, shading, procedural
//! textures, backgrounds, compositing, and conflicting-cue hybrids.

pub mod background;
pub mod hybrid;
pub mod raster;
pub mod rasterizer;
pub mod scene;
pub mod texture;

pub use background::{background_image, BACKGROUND_COUNT};
pub use hybrid::hybrid_render;
pub use raster::{composite, RasterImage};
pub use rasterizer::{render, silhouette};
pub use scene::{random_lighting, Camera, DirectionalLight, LightingSetup, Material};
pub use texture::{histogram_equalize, procedural_texture, TextureKind, TextureSampler, TextureSpec};
