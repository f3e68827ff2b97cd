int main(void) { int i = 0; ++i; return i; }
