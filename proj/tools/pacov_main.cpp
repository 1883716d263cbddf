// vim:ts=2:et
// Placeholder; full command-line tool lands with the toolkit modules.
int main() { return 0; }
