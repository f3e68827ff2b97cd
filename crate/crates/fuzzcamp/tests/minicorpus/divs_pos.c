int main(void) { int a = 9; int b = a / 2; int c = a % 4; return b + c; }
