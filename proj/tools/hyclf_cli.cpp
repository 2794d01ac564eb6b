// placeholder main; the CLI is assembled once the runner lands
int main() { return 0; }
