pub mod cli;
pub mod family;
pub mod geom;
pub mod io;
pub mod isometry;
pub mod necklace;
pub mod optimize;
pub mod render;
pub mod search;
pub mod two_eyes;
