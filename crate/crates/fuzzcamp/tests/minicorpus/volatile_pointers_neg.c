int main(void) {
    volatile int busy = 1;
    int *q = 0;
    int r = busy;
    return q == 0 ? r : 0;
}
