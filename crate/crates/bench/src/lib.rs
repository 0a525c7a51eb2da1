pub use stiffsde;
