fn main() { println!("orbimag"); }
