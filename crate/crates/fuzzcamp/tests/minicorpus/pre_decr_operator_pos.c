int main(void) { int i = 2; --i; return i; }
