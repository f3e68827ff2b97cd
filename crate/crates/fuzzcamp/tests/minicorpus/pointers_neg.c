int main(void) { int a = 6; int b = a & 3; return a * b; }
