pub mod experiment;
pub mod par;
pub mod pomdp;
pub mod signaling;
pub mod stats;
pub mod wumpus;
