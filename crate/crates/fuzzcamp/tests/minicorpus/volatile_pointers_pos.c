static volatile int *vp;
int main(void) { return vp == 0; }
