int main() { return 2; }  // placeholder until the command surface lands
