fn main() {
    println!("bcplus");
}
