pub mod laser_script;
pub mod oracles;
