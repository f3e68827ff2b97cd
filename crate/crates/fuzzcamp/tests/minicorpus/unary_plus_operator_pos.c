int main(void) { int a = +5; int b = (+a); return a + b; }
